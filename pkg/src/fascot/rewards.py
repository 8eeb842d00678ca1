"""Binary dual rewards for generated annotations, plus batch accuracy.

Two independent axes, each exactly 0 or 1: accuracy (extracted conclusion
equals the ground-truth label) and format (Strict template compliance).
Weighting or combining them is the consumer's business, not ours.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from . import manifests
from .cot import Strictness, Verdict, extract_conclusion, validate_annotation


@dataclass(frozen=True)
class RewardScore:
    accuracy: int
    format: int


@dataclass(frozen=True)
class AccuracyReport:
    matched: int
    mismatched: int

    @property
    def total(self) -> int:
        return self.matched + self.mismatched

    @property
    def accuracy(self) -> float:
        return self.matched / self.total

    def render(self) -> str:
        return f"accuracy {self.accuracy:.3f} ({self.matched}/{self.total} matched)"


class EmptyBatchError(ValueError):
    def __init__(self):
        super().__init__("cannot score an empty batch")


def accuracy_reward(raw_output: str, truth: Verdict) -> int:
    return 1 if extract_conclusion(raw_output) == truth else 0


def format_reward(raw_output: str) -> int:
    return 1 if validate_annotation(raw_output, Strictness.STRICT).ok else 0


def score_pair(raw_output: str, truth: Verdict) -> RewardScore:
    return RewardScore(accuracy_reward(raw_output, truth), format_reward(raw_output))


def score_stream(records: Iterable[tuple[str, Verdict]]) -> Iterator[RewardScore]:
    """Streaming mode: score lazily so RL rollouts avoid temp files."""
    for raw, truth in records:
        yield score_pair(raw, truth)


def batch_accuracy(records: list[tuple[str, Verdict]]) -> AccuracyReport:
    if not records:
        raise EmptyBatchError()
    matched = sum(accuracy_reward(raw, truth) for raw, truth in records)
    return AccuracyReport(matched=matched, mismatched=len(records) - matched)


# ---------------------------------------------------------------------------
# File mode and the canonical report serialization. The CLI and the service
# must emit byte-identical reports, so both call serialize_score_report.
# ---------------------------------------------------------------------------


def read_pairs(path: str | Path) -> list[tuple[str | None, str, Verdict]]:
    """Load (id, raw_output, truth) rows from a pairs manifest."""
    rows = []
    for line_no, obj in enumerate(manifests.read_manifest(path, manifests.PAIRS_SCHEMA), start=2):
        try:
            rows.append((obj.get("id"), obj["raw_output"], Verdict(obj["truth"])))
        except (KeyError, ValueError) as e:
            raise manifests.MalformedManifestError(line_no, f"bad pair row: {e}") from None
    return rows


def score_report_payload(ids: list[str | None], scores: list[RewardScore], report: AccuracyReport) -> dict:
    return {
        "items": [
            {"id": i, "accuracy": s.accuracy, "format": s.format}
            for i, s in zip(ids, scores)
        ],
        "report": {
            "matched": report.matched,
            "mismatched": report.mismatched,
            "accuracy": report.accuracy,
        },
    }


def serialize_score_report(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def score_file(pairs_path: str | Path) -> tuple[dict, AccuracyReport]:
    """File mode: score a pairs manifest, returning the canonical payload."""
    rows = read_pairs(pairs_path)
    if not rows:
        raise EmptyBatchError()
    ids = [r[0] for r in rows]
    scores = [score_pair(raw, truth) for _, raw, truth in rows]
    report = batch_accuracy([(raw, truth) for _, raw, truth in rows])
    return score_report_payload(ids, scores, report), report
