"""FAS evaluation metrics over per-sample liveness scores.

Conventions are fixed here once: scores live in [0,1] with higher meaning
more live; FAR counts attacks scored >= threshold (ties accepted); FRR counts
lives scored < threshold; AUC is the pairwise statistic with half credit for
ties. Score files declaring the opposite polarity are complemented on load so
everything downstream sees one convention.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable


class EvalLabel(Enum):
    LIVE = "Live"
    ATTACK = "Attack"


class DegenerateClassesError(ValueError):
    def __init__(self):
        super().__init__("need at least one Live and one Attack row")


class MalformedScoreFileError(ValueError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


@dataclass(frozen=True)
class EvalRow:
    sample_id: str
    score: float
    label: EvalLabel

    def __post_init__(self):
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score!r} outside [0, 1]")


@dataclass(frozen=True)
class EvalMetrics:
    hter_pct: float
    auc_pct: float
    far: float
    frr: float
    threshold: float
    eer_pct: float

    def to_payload(self) -> dict:
        t = self.threshold
        return {
            "hter_pct": self.hter_pct,
            "auc_pct": self.auc_pct,
            "far": self.far,
            "frr": self.frr,
            "threshold": t if math.isfinite(t) else ("inf" if t > 0 else "-inf"),
            "eer_pct": self.eer_pct,
        }


def _split_scores(rows: Iterable[EvalRow]) -> tuple[list[float], list[float]]:
    lives, attacks = [], []
    for r in rows:
        (lives if r.label is EvalLabel.LIVE else attacks).append(r.score)
    if not lives or not attacks:
        raise DegenerateClassesError()
    return lives, attacks


def compute_auc(rows: list[EvalRow]) -> float:
    """Pairwise AUC as a percentage, exact integer counting underneath."""
    lives, attacks = _split_scores(rows)
    attacks_sorted = sorted(attacks)
    wins = 0
    ties = 0
    for s in lives:
        wins += bisect_left(attacks_sorted, s)
        ties += bisect_right(attacks_sorted, s) - bisect_left(attacks_sorted, s)
    return (2 * wins + ties) * 50.0 / (len(lives) * len(attacks))


def far_frr(rows: list[EvalRow], threshold: float) -> tuple[float, float]:
    lives, attacks = _split_scores(rows)
    far = sum(1 for s in attacks if s >= threshold) / len(attacks)
    frr = sum(1 for s in lives if s < threshold) / len(lives)
    return far, frr


def eer_threshold(rows: list[EvalRow]) -> tuple[float, float]:
    """Threshold minimizing |FAR - FRR|; ties resolved to the lowest one.

    Candidates are the midpoints between adjacent distinct scores plus the
    two infinities, so every achievable (FAR, FRR) operating point is seen.
    """
    distinct = sorted({r.score for r in rows})
    candidates = [-math.inf]
    candidates += [(a + b) / 2 for a, b in zip(distinct, distinct[1:])]
    candidates.append(math.inf)
    best_t = None
    best_gap = None
    best_eer = None
    for t in candidates:
        far, frr = far_frr(rows, t)
        gap = abs(far - frr)
        if best_gap is None or gap < best_gap:
            best_t, best_gap, best_eer = t, gap, (far + frr) * 50.0
    return best_t, best_eer


def compute_hter(rows: list[EvalRow], threshold: float) -> EvalMetrics:
    """Full metric row at the given threshold (AUC and EER are threshold-free)."""
    far, frr = far_frr(rows, threshold)
    _, eer = eer_threshold(rows)
    return EvalMetrics(
        hter_pct=(far + frr) * 50.0,
        auc_pct=compute_auc(rows),
        far=far,
        frr=frr,
        threshold=threshold,
        eer_pct=eer,
    )


# ---------------------------------------------------------------------------
# Score files
# ---------------------------------------------------------------------------

SCORES_HEADER_PREFIX = "# fascot/scores"


def write_score_file(path: str | Path, rows: Iterable[EvalRow], polarity: str = "live-high") -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{SCORES_HEADER_PREFIX} polarity={polarity}\n")
        for r in rows:
            score = r.score if polarity == "live-high" else 1.0 - r.score
            f.write(f"{r.sample_id} {score!r} {r.label.value}\n")


def load_score_file(path: str | Path) -> list[EvalRow]:
    """Parse `sample_id score label` lines after the one header line.

    A `polarity=live-low` header means higher scores are more attack-like;
    those are complemented (1 - s) on load to restore the fixed convention.
    """
    rows = []
    with open(path, encoding="utf-8") as f:
        lines = f.readlines()
    if not lines or not lines[0].startswith("#"):
        raise MalformedScoreFileError(1, "missing header line")
    flip = "polarity=live-low" in lines[0]
    for line_no, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedScoreFileError(line_no, f"expected 3 fields, got {len(parts)}")
        sid, score_text, label_text = parts
        try:
            score = float(score_text)
        except ValueError:
            raise MalformedScoreFileError(line_no, f"bad score {score_text!r}") from None
        try:
            label = EvalLabel(label_text)
        except ValueError:
            raise MalformedScoreFileError(line_no, f"bad label {label_text!r}") from None
        if flip:
            score = 1.0 - score
        try:
            rows.append(EvalRow(sid, score, label))
        except ValueError as e:
            raise MalformedScoreFileError(line_no, str(e)) from None
    return rows


# ---------------------------------------------------------------------------
# Multi-benchmark protocol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdPolicy:
    kind: str
    value: float | None = None
    dev_path: str | None = None

    @classmethod
    def eer_on_eval(cls) -> "ThresholdPolicy":
        return cls("eer")

    @classmethod
    def fixed(cls, t: float) -> "ThresholdPolicy":
        return cls("fixed", value=t)

    @classmethod
    def from_dev_file(cls, path: str) -> "ThresholdPolicy":
        return cls("dev", dev_path=path)

    @classmethod
    def parse(cls, spec: str) -> "ThresholdPolicy":
        if spec == "eer":
            return cls.eer_on_eval()
        if spec.startswith("fixed:"):
            return cls.fixed(float(spec.split(":", 1)[1]))
        if spec.startswith("dev:"):
            return cls.from_dev_file(spec.split(":", 1)[1])
        raise ValueError(f"unknown threshold policy {spec!r}")


@dataclass(frozen=True)
class AverageRow:
    hter_pct: float
    auc_pct: float
    far: float
    frr: float
    eer_pct: float


@dataclass(frozen=True)
class BenchmarkReport:
    rows: dict[str, EvalMetrics]
    errors: dict[str, str]
    average: AverageRow | None

    def to_payload(self) -> dict:
        payload: dict = {
            "benchmarks": {name: m.to_payload() for name, m in self.rows.items()},
            "errors": dict(self.errors),
        }
        if self.average is not None:
            payload["average"] = {
                "hter_pct": self.average.hter_pct,
                "auc_pct": self.average.auc_pct,
                "far": self.average.far,
                "frr": self.average.frr,
                "eer_pct": self.average.eer_pct,
            }
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), indent=2, sort_keys=True)


def _resolve_threshold(rows: list[EvalRow], policy: ThresholdPolicy) -> float:
    if policy.kind == "eer":
        return eer_threshold(rows)[0]
    if policy.kind == "fixed":
        return policy.value
    if policy.kind == "dev":
        dev_rows = load_score_file(policy.dev_path)
        return eer_threshold(dev_rows)[0]
    raise ValueError(f"unknown policy kind {policy.kind!r}")


def run_protocol(
    score_files: dict[str, str | Path], policy: ThresholdPolicy | None = None
) -> BenchmarkReport:
    """Evaluate each benchmark independently; one bad file never sinks the rest."""
    policy = policy or ThresholdPolicy.eer_on_eval()
    rows_out: dict[str, EvalMetrics] = {}
    errors: dict[str, str] = {}
    for name in sorted(score_files):
        try:
            rows = load_score_file(score_files[name])
            threshold = _resolve_threshold(rows, policy)
            rows_out[name] = compute_hter(rows, threshold)
        except (OSError, ValueError) as e:
            errors[name] = str(e)
    average = None
    if rows_out:
        n = len(rows_out)
        average = AverageRow(
            hter_pct=sum(m.hter_pct for m in rows_out.values()) / n,
            auc_pct=sum(m.auc_pct for m in rows_out.values()) / n,
            far=sum(m.far for m in rows_out.values()) / n,
            frr=sum(m.frr for m in rows_out.values()) / n,
            eer_pct=sum(m.eer_pct for m in rows_out.values()) / n,
        )
    return BenchmarkReport(rows=rows_out, errors=errors, average=average)


def render_report_table(report: BenchmarkReport) -> str:
    header = ("Benchmark", "HTER%", "AUC%", "EER%", "FAR", "FRR", "Threshold")
    lines_data = []
    for name, m in report.rows.items():
        t = f"{m.threshold:.6g}" if math.isfinite(m.threshold) else str(m.threshold)
        lines_data.append(
            (name, f"{m.hter_pct:.3f}", f"{m.auc_pct:.3f}", f"{m.eer_pct:.3f}",
             f"{m.far:.3f}", f"{m.frr:.3f}", t)
        )
    if report.average is not None:
        a = report.average
        lines_data.append(
            ("Avg.", f"{a.hter_pct:.3f}", f"{a.auc_pct:.3f}", f"{a.eer_pct:.3f}",
             f"{a.far:.3f}", f"{a.frr:.3f}", "-")
        )
    widths = [max(len(header[i]), *(len(row[i]) for row in lines_data)) if lines_data else len(header[i])
              for i in range(len(header))]
    def fmt(row):
        return "  ".join(
            f"{cell:<{widths[0]}}" if i == 0 else f"{cell:>{widths[i]}}"
            for i, cell in enumerate(row)
        )
    out = [fmt(header)]
    out.extend(fmt(row) for row in lines_data)
    for name, msg in report.errors.items():
        out.append(f"{name}: ERROR {msg}")
    return "\n".join(out)
