"""End-to-end acceptance gate.

One test per criterion; each registers a single PASS/FAIL line that the
terminal summary prints (see conftest.record_acceptance).
"""

from __future__ import annotations

import json
import math
import random
import time
from collections import Counter

from click.testing import CliRunner
from fastapi.testclient import TestClient

from conftest import random_annotation, random_fuzz_string, record_acceptance
from oracles import brute_auc, brute_eer, brute_far_frr, scan_conclusion

from fascot import manifests
from fascot.cli import main as cli_main
from fascot.cot import Strictness, Verdict, extract_conclusion, parse_annotation, serialize_annotation
from fascot.dataset import (
    GOLD100K_COUNTS,
    SILVER982K_COUNTS,
    SamplingPlan,
    dataset_stats,
    render_stats_table,
    sample_balanced,
    synthesize_pool,
    write_sample_manifest,
)
from fascot.metrics import EvalLabel, EvalRow, compute_auc, eer_threshold, far_frr
from fascot.pipeline import (
    AttemptStatus,
    PipelineConfig,
    ScriptedMockClient,
    annotate_batch,
    final_statuses,
    template_annotation,
)
from fascot.rewards import batch_accuracy
from fascot.service import HardCaseStore, create_app
from fascot.taxonomy import CATEGORY_SUBTYPES, Category


def test_ac1_grammar_round_trip():
    rng = random.Random(11)
    start = time.perf_counter()
    failures = 0
    for _ in range(10_000):
        a = random_annotation(rng)
        if parse_annotation(serialize_annotation(a), Strictness.STRICT) != a:
            failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10.0
    record_acceptance("AC1 grammar round-trip", ok,
                      f"10,000 strict round-trips, {failures} failures, {elapsed:.2f}s (< 10s)")
    assert failures == 0
    assert elapsed < 10.0


def test_ac2_conclusion_extraction_oracle():
    rng = random.Random(22)
    disagreements = 0
    for _ in range(1_000):
        s = random_fuzz_string(rng)
        got = extract_conclusion(s)
        want = scan_conclusion(s)
        if (got.value if got else None) != want:
            disagreements += 1
    ok = disagreements == 0
    record_acceptance("AC2 conclusion extraction", ok,
                      f"1,000 fuzzed strings vs linear-scan oracle, {disagreements} disagreements")
    assert disagreements == 0


def test_ac3_full_scale_replay():
    samples = synthesize_pool(GOLD100K_COUNTS, prefix="replay")
    assert len(samples) == 100_000
    fail_round1 = {s.id for s in samples[:1_024]}
    fail_round2 = {s.id for s in samples[:581]}

    def script(sid, rnd, bundle):
        wrong = Verdict.NO if bundle.label is Verdict.YES else Verdict.YES
        fails = fail_round1 if rnd == 1 else fail_round2
        return template_annotation(wrong if sid in fails else bundle.label)

    cfg = PipelineConfig(max_rounds=2, parse_outputs=False)
    start = time.perf_counter()
    attempts = annotate_batch(samples, ScriptedMockClient(script), cfg)
    elapsed = time.perf_counter() - start

    counts = Counter(final_statuses(attempts).values())
    accepted = counts[AttemptStatus.ACCEPTED]
    hard = counts[AttemptStatus.HARD_CASE]
    round1_accepted = sum(
        1 for a in attempts if a.round == 1 and a.status is AttemptStatus.ACCEPTED
    )
    ok = (accepted, hard, round1_accepted) == (99_419, 581, 98_976) and elapsed < 300.0
    record_acceptance(
        "AC3 100K pipeline replay", ok,
        f"accepted={accepted:,} hard={hard:,} round1={round1_accepted:,}, {elapsed:.1f}s (< 300s)")
    assert accepted == 99_419
    assert hard == 581
    assert round1_accepted == 98_976
    assert counts[AttemptStatus.CLIENT_ERROR] == 0
    assert elapsed < 300.0


def test_ac4_accuracy_reconstruction():
    def batch(matched: int, total: int):
        right = template_annotation(Verdict.YES)
        wrong = template_annotation(Verdict.NO)
        return [(right, Verdict.YES)] * matched + [(wrong, Verdict.YES)] * (total - matched)

    sft = batch_accuracy(batch(1_760, 2_000))
    rl = batch_accuracy(batch(1_992, 2_000))
    ok = (sft.accuracy == 0.880 and rl.accuracy == 0.996
          and "0.880" in sft.render() and "0.996" in rl.render())
    record_acceptance("AC4 accuracy reconstruction", ok,
                      f"1760/2000 -> {sft.accuracy!r}, 1992/2000 -> {rl.accuracy!r} (exact)")
    assert sft.accuracy == 0.880
    assert sft.matched == 1_760 and sft.total == 2_000
    assert rl.accuracy == 0.996
    assert sft.render() == "accuracy 0.880 (1760/2000 matched)"
    assert rl.render() == "accuracy 0.996 (1992/2000 matched)"


GOLD_TABLE = (
    "Types          Count\n"
    "Photo          5,000\n"
    "Newspaper      3,000\n"
    "Poster         5,000\n"
    "Album          3,000\n"
    "A4             3,000\n"
    "FacialPrint    3,000\n"
    "UpperBody      3,000\n"
    "Phone         10,000\n"
    "Pad           10,000\n"
    "PC             5,000\n"
    "Mask3D        12,768\n"
    "RegionMask    10,579\n"
    "Garagekit      1,488\n"
    "Adultdull        165\n"
    "Living        25,000\n"
    "Total        100,000"
)


def test_ac5_dataset_statistics_fixture():
    gold = dataset_stats(synthesize_pool(GOLD100K_COUNTS))
    table = render_stats_table(gold)
    silver_total = sum(SILVER982K_COUNTS.values())
    ok = table == GOLD_TABLE and gold.total == 100_000 and silver_total == 982_468
    record_acceptance("AC5 dataset statistics", ok,
                      f"100K table byte-exact={table == GOLD_TABLE}, 982K total={silver_total:,}")
    assert table == GOLD_TABLE
    assert gold.total == 100_000
    assert silver_total == 982_468
    assert dataset_stats(synthesize_pool(SILVER982K_COUNTS)).total == 982_468


def _random_rows(rng: random.Random) -> tuple[list[EvalRow], list[float], list[float]]:
    n_live = rng.randint(1, 6)
    n_attack = rng.randint(1, min(6, 12 - n_live))
    grid = [k / 8 for k in range(9)]
    draw = lambda: rng.choice(grid) if rng.random() < 0.5 else rng.random()
    lives = [draw() for _ in range(n_live)]
    attacks = [draw() for _ in range(n_attack)]
    rows = [EvalRow(f"l{i}", s, EvalLabel.LIVE) for i, s in enumerate(lives)]
    rows += [EvalRow(f"a{i}", s, EvalLabel.ATTACK) for i, s in enumerate(attacks)]
    return rows, lives, attacks


def _monotone_remap(rows: list[EvalRow], rng: random.Random) -> list[EvalRow]:
    distinct = sorted({r.score for r in rows})
    while True:
        new_vals = sorted(rng.random() for _ in distinct)
        if all(a < b for a, b in zip(new_vals, new_vals[1:])):
            break
    mapping = dict(zip(distinct, new_vals))
    return [EvalRow(r.sample_id, mapping[r.score], r.label) for r in rows]


def test_ac6_metric_oracles():
    rng = random.Random(66)
    tol = 1e-9
    worst = 0.0
    for _ in range(1_000):
        rows, lives, attacks = _random_rows(rng)
        worst = max(worst, abs(compute_auc(rows) - brute_auc(lives, attacks)))
        t = rng.choice([r.score for r in rows] + [rng.random(), 0.0, 1.0])
        far, frr = far_frr(rows, t)
        bfar, bfrr = brute_far_frr(lives, attacks, t)
        worst = max(worst, abs(far - bfar), abs(frr - bfrr))
        et, eer = eer_threshold(rows)
        bt, beer = brute_eer(lives, attacks)
        worst = max(worst, abs(eer - beer))
        # thresholds must agree too; infinities compare by identity
        if math.isinf(et) or math.isinf(bt):
            assert et == bt
        else:
            worst = max(worst, abs(et - bt))

    invariant_failures = 0
    for _ in range(100):
        rows, _, _ = _random_rows(rng)
        base = compute_auc(rows)
        if abs(compute_auc(_monotone_remap(rows, rng)) - base) > tol:
            invariant_failures += 1

    ok = worst <= tol and invariant_failures == 0
    record_acceptance(
        "AC6 metric oracles", ok,
        f"1,000 trials vs brute force (worst |err|={worst:.1e} <= 1e-9), "
        f"100 monotone transforms, {invariant_failures} AUC drifts")
    assert worst <= tol
    assert invariant_failures == 0


def test_ac7_sampler_determinism_and_balance(tmp_path):
    pool = synthesize_pool({st: 200 for sts in CATEGORY_SUBTYPES.values() for st in sts})
    plan = SamplingPlan(per_category_target={
        Category.LIVE: 61, Category.PRINT: 77, Category.REPLAY: 50, Category.MASK: 41,
    }, seed=5)

    first, _ = sample_balanced(pool, plan)
    second, _ = sample_balanced(pool, plan)
    p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    write_sample_manifest(p1, first)
    write_sample_manifest(p2, second)
    identical = p1.read_bytes() == p2.read_bytes()

    per_subtype = Counter(r.subtype for r in first)
    worst_dev = 0
    for cat, subtypes in CATEGORY_SUBTYPES.items():
        chosen = [per_subtype[st] for st in subtypes]
        worst_dev = max(worst_dev, max(chosen) - min(chosen))

    ok = identical and worst_dev <= 1
    record_acceptance("AC7 sampler determinism/balance", ok,
                      f"byte-identical={identical}, max in-category deviation={worst_dev} (<= 1)")
    assert identical
    assert worst_dev <= 1
    assert len(first) == 61 + 77 + 50 + 41


def test_ac8_service_cli_parity(tmp_path):
    items = [
        {"id": "p0", "raw_output": template_annotation(Verdict.YES), "truth": "Yes"},
        {"id": "p1", "raw_output": template_annotation(Verdict.NO), "truth": "Yes"},
        {"id": "p2", "raw_output": "free text, no tags", "truth": "No"},
        {"id": "p3", "raw_output": "pre " + template_annotation(Verdict.NO), "truth": "No"},
    ]
    pairs = tmp_path / "pairs.jsonl"
    manifests.write_manifest(pairs, manifests.PAIRS_SCHEMA, items)

    json_out = tmp_path / "report.json"
    result = CliRunner().invoke(
        cli_main, ["score", "--pairs", str(pairs), "--json-out", str(json_out)])
    assert result.exit_code == 0, result.output
    cli_bytes = json_out.read_bytes()

    client = TestClient(create_app(HardCaseStore()))
    response = client.post("/score", json={"items": items})
    assert response.status_code == 200
    service_bytes = response.content

    ok = cli_bytes == service_bytes and len(cli_bytes) > 0
    record_acceptance("AC8 service/CLI parity", ok,
                      f"identical report bytes={cli_bytes == service_bytes} ({len(cli_bytes)} bytes), "
                      "suite has no UI dependency")
    assert cli_bytes == service_bytes
    assert json.loads(cli_bytes)["report"]["matched"] == 2
