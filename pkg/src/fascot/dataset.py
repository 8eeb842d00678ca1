"""Balanced dataset construction, statistics, and training-stage manifests.

The sampler draws a per-category target split evenly over the category's
subtypes. When a subtype cannot fill its quota the shortfall is pushed onto
its siblings proportionally to how much room they have left, using
largest-remainder rounding with ties broken by subtype declaration order.
Selection is a seeded shuffle per subtype, so builds are reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import manifests
from .cot import serialize_annotation
from .pipeline import AnnotationAttempt, AttemptStatus
from .taxonomy import CATEGORY_SUBTYPES, Category, SampleRecord, Subtype

# Reference per-subtype sample counts for the two corpus releases; used by
# fixtures and sanity checks.
GOLD100K_COUNTS: dict[Subtype, int] = {
    Subtype.PHOTO: 5_000,
    Subtype.NEWSPAPER: 3_000,
    Subtype.POSTER: 5_000,
    Subtype.ALBUM: 3_000,
    Subtype.A4: 3_000,
    Subtype.FACIAL_PRINT: 3_000,
    Subtype.UPPER_BODY: 3_000,
    Subtype.PHONE: 10_000,
    Subtype.PAD: 10_000,
    Subtype.PC: 5_000,
    Subtype.MASK_3D: 12_768,
    Subtype.REGION_MASK: 10_579,
    Subtype.GARAGEKIT: 1_488,
    Subtype.ADULTDULL: 165,
    Subtype.LIVING: 25_000,
}

SILVER982K_COUNTS: dict[Subtype, int] = {
    Subtype.PHOTO: 138_373,
    Subtype.NEWSPAPER: 14_425,
    Subtype.POSTER: 72_079,
    Subtype.ALBUM: 56_490,
    Subtype.A4: 31_776,
    Subtype.FACIAL_PRINT: 33_647,
    Subtype.UPPER_BODY: 30_167,
    Subtype.PHONE: 66_434,
    Subtype.PAD: 48_516,
    Subtype.PC: 31_072,
    Subtype.MASK_3D: 52_637,
    Subtype.REGION_MASK: 33_285,
    Subtype.GARAGEKIT: 4_505,
    Subtype.ADULTDULL: 1_454,
    Subtype.LIVING: 367_608,
}


class CategoryExhaustedError(ValueError):
    def __init__(self, category: Category, target: int, available: int):
        self.category = category
        self.target = target
        self.available = available
        super().__init__(
            f"category {category.value} has {available} samples, target {target}"
        )


class PlanInfeasibleError(ValueError):
    pass


class MissingAnnotationError(ValueError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"accepted attempt for {sample_id} has no parsed annotation")


@dataclass(frozen=True)
class SamplingPlan:
    per_category_target: dict[Category, int]
    subtype_balance_tolerance: int = 1
    seed: int = 0

    def __post_init__(self):
        for cat, target in self.per_category_target.items():
            if target <= 0:
                raise PlanInfeasibleError(f"target for {cat.value} must be positive")
        if self.subtype_balance_tolerance < 0:
            raise PlanInfeasibleError("tolerance must be >= 0")

    @classmethod
    def from_file(cls, path: str | Path, seed: int | None = None) -> "SamplingPlan":
        import json

        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        targets = {Category(k): int(v) for k, v in raw["per_category_target"].items()}
        return cls(
            per_category_target=targets,
            subtype_balance_tolerance=int(raw.get("subtype_balance_tolerance", 1)),
            seed=int(raw["seed"]) if seed is None and "seed" in raw else (seed or 0),
        )


@dataclass(frozen=True)
class ShortfallEntry:
    category: Category
    subtype: Subtype
    quota: int
    available: int


@dataclass
class ShortfallReport:
    entries: list[ShortfallEntry] = field(default_factory=list)
    unmet: dict[Category, int] = field(default_factory=dict)

    @property
    def total_unmet(self) -> int:
        return sum(self.unmet.values())


def _largest_remainder(total: int, weights: list[int]) -> list[int]:
    """Integer split of total proportional to weights; ties favor low index.

    When every weight equals its receiver's spare capacity, no share exceeds
    that capacity.
    """
    wsum = sum(weights)
    if wsum == 0:
        return [0] * len(weights)
    floors = [total * w // wsum for w in weights]
    remainders = [total * w % wsum for w in weights]
    leftover = total - sum(floors)
    order = sorted(range(len(weights)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        floors[i] += 1
    return floors


def _category_quotas(
    target: int, subtypes: tuple[Subtype, ...], avail: dict[Subtype, int]
) -> tuple[dict[Subtype, int], int]:
    """Even split, then iterative shortfall redistribution. Returns quotas and
    the unmet remainder (0 when the category can cover its target)."""
    even = _largest_remainder(target, [1] * len(subtypes))
    quotas = {s: q for s, q in zip(subtypes, even)}
    active = [s for s in subtypes]
    while True:
        over = [s for s in active if quotas[s] > avail[s]]
        if not over:
            return quotas, 0
        deficit = sum(quotas[s] - avail[s] for s in over)
        for s in over:
            quotas[s] = avail[s]
            active.remove(s)
        caps = [avail[s] - quotas[s] for s in active]
        absorbable = min(deficit, sum(caps))
        extra = _largest_remainder(absorbable, caps)
        for s, e in zip(active, extra):
            quotas[s] += e
        if absorbable < deficit:
            return quotas, deficit - absorbable


def sample_balanced(
    pool: list[SampleRecord],
    plan: SamplingPlan,
    allow_shortfall: bool = False,
) -> tuple[list[SampleRecord], ShortfallReport]:
    """Draw the plan from the pool deterministically.

    Raises CategoryExhausted when a category cannot reach its target unless
    allow_shortfall is set, in which case the gap lands in the report.
    """
    by_subtype: dict[Subtype, list[SampleRecord]] = {s: [] for s in Subtype}
    for r in pool:
        by_subtype[r.subtype].append(r)

    report = ShortfallReport()
    selected: list[SampleRecord] = []
    for cat in Category:
        if cat not in plan.per_category_target:
            continue
        target = plan.per_category_target[cat]
        subtypes = CATEGORY_SUBTYPES[cat]
        avail = {s: len(by_subtype[s]) for s in subtypes}
        quotas, unmet = _category_quotas(target, subtypes, avail)
        if unmet > 0:
            if not allow_shortfall:
                raise CategoryExhaustedError(cat, target, sum(avail.values()))
            report.unmet[cat] = unmet

        even = _largest_remainder(target, [1] * len(subtypes))
        for s, initial in zip(subtypes, even):
            if avail[s] < initial:
                report.entries.append(ShortfallEntry(cat, s, initial, avail[s]))

        had_shortfall = any(e.category is cat for e in report.entries)
        if not had_shortfall:
            spread = max(quotas.values()) - min(quotas.values())
            if spread > plan.subtype_balance_tolerance:
                raise PlanInfeasibleError(
                    f"{cat.value}: subtype spread {spread} exceeds tolerance"
                    f" {plan.subtype_balance_tolerance}"
                )

        for s in subtypes:
            members = list(by_subtype[s])
            rng = random.Random(f"{plan.seed}:{cat.value}:{s.value}")
            rng.shuffle(members)
            selected.extend(members[: quotas[s]])

    return selected, report


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetStats:
    counts: dict[Subtype, int]
    total: int

    def to_payload(self) -> dict:
        return {"counts": {s.value: self.counts[s] for s in Subtype}, "total": self.total}


def dataset_stats(manifest: str | Path | Iterable[SampleRecord]) -> DatasetStats:
    """Exact per-subtype counts; accepts a manifest path or records."""
    if isinstance(manifest, (str, Path)):
        records: Iterable[SampleRecord] = (
            SampleRecord.from_dict(row)
            for row in manifests.read_manifest(manifest, manifests.SAMPLES_SCHEMA)
        )
    else:
        records = manifest
    counts = {s: 0 for s in Subtype}
    total = 0
    for r in records:
        counts[r.subtype] += 1
        total += 1
    return DatasetStats(counts=counts, total=total)


def render_stats_table(stats: DatasetStats) -> str:
    """Aligned two-column table, thousands separators, trailing total row."""
    rows = [(s.value, f"{stats.counts[s]:,}") for s in Subtype]
    rows.append(("Total", f"{stats.total:,}"))
    name_w = max(len("Types"), *(len(n) for n, _ in rows))
    count_w = max(len("Count"), *(len(c) for _, c in rows))
    lines = [f"{'Types':<{name_w}}  {'Count':>{count_w}}"]
    lines.extend(f"{n:<{name_w}}  {c:>{count_w}}" for n, c in rows)
    return "\n".join(lines)


def write_sample_manifest(path: str | Path, records: Iterable[SampleRecord]) -> int:
    return manifests.write_manifest(
        path, manifests.SAMPLES_SCHEMA, (r.to_dict() for r in records)
    )


def read_sample_manifest(path: str | Path) -> list[SampleRecord]:
    return [
        SampleRecord.from_dict(row)
        for row in manifests.read_manifest(path, manifests.SAMPLES_SCHEMA)
    ]


def synthesize_pool(counts: dict[Subtype, int], prefix: str = "syn") -> list[SampleRecord]:
    """Deterministic fixture pool with the given per-subtype counts."""
    out = []
    for s in Subtype:
        for i in range(counts.get(s, 0)):
            sid = f"{prefix}-{s.value}-{i:06d}"
            out.append(SampleRecord.make(sid, f"images/{sid}.jpg", s))
    return out


# ---------------------------------------------------------------------------
# Training-stage manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageManifests:
    stage1: list[dict]
    stage2: list[dict]


def emit_stage_manifests(
    accepted: Iterable[AnnotationAttempt],
    samples: list[SampleRecord],
    out_dir: str | Path | None = None,
) -> StageManifests:
    """Stage 1 pairs each image with its CoT text; stage 2 adds the label."""
    records = {s.id: s for s in samples}
    stage1 = []
    stage2 = []
    for a in accepted:
        if a.status is not AttemptStatus.ACCEPTED:
            continue
        if a.parsed is None:
            raise MissingAnnotationError(a.sample_id)
        if a.sample_id not in records:
            raise ValueError(f"attempt {a.sample_id} has no sample record")
        s = records[a.sample_id]
        text = serialize_annotation(a.parsed)
        stage1.append({"id": s.id, "image_ref": s.image_ref, "annotation": text})
        stage2.append(
            {"id": s.id, "image_ref": s.image_ref, "annotation": text, "label": s.label.value}
        )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        manifests.write_manifest(out / "stage1.jsonl", manifests.STAGE1_SCHEMA, stage1)
        manifests.write_manifest(out / "stage2.jsonl", manifests.STAGE2_SCHEMA, stage2)
    return StageManifests(stage1=stage1, stage2=stage2)
