"""Hard-case queue state with event-log persistence.

State is held in memory and mutated under one lock; every mutation appends an
event to a journal and bumps a global revision. Restarting over the same
journal replays it and lands on the same state and revision, which is the
whole persistence story: no database, one auditable file.
"""

from __future__ import annotations

import base64
import json
import threading
from bisect import insort
from enum import Enum
from pathlib import Path

from .. import manifests
from ..cot import CoTAnnotation, Strictness, validate_annotation
from ..dataset import DatasetStats, dataset_stats
from ..pipeline import (
    CorrectionRejectedError,
    HardCase,
    RejectionReason,
    submit_correction,
)
from ..taxonomy import Subtype

EVENTS_SCHEMA = "fascot/events"


class ApiErrorCode(Enum):
    NOT_FOUND = "NotFound"
    VALIDATION_FAILED = "ValidationFailed"
    CONCLUSION_MISMATCH = "ConclusionMismatch"
    CONFLICT = "Conflict"
    BAD_REQUEST = "BadRequest"
    UNAUTHORIZED = "Unauthorized"


_STATUS = {
    ApiErrorCode.NOT_FOUND: 404,
    ApiErrorCode.VALIDATION_FAILED: 422,
    ApiErrorCode.CONCLUSION_MISMATCH: 422,
    ApiErrorCode.CONFLICT: 409,
    ApiErrorCode.BAD_REQUEST: 400,
    ApiErrorCode.UNAUTHORIZED: 401,
}


class ApiError(Exception):
    def __init__(self, code: ApiErrorCode, message: str, details=None):
        self.code = code
        self.details = details
        self.status = _STATUS[code]
        super().__init__(message)

    def body(self) -> dict:
        return {"error": {"code": self.code.value, "message": str(self), "details": self.details}}


def encode_cursor(flagged_at: float, sample_id: str) -> str:
    raw = json.dumps([flagged_at, sample_id]).encode("utf-8")
    return base64.urlsafe_b64encode(raw).decode("ascii")


def decode_cursor(cursor: str) -> tuple[float, str]:
    try:
        flagged_at, sample_id = json.loads(base64.urlsafe_b64decode(cursor.encode("ascii")))
        return float(flagged_at), str(sample_id)
    except Exception:
        raise ApiError(ApiErrorCode.BAD_REQUEST, f"malformed cursor {cursor!r}") from None


class HardCaseStore:
    def __init__(self, store_path: str | Path | None = None, samples_manifest: str | Path | None = None):
        self._lock = threading.Lock()
        self._cases: dict[str, HardCase] = {}
        self._order: list[tuple[float, str]] = []
        self._revision = 0
        self._path = Path(store_path) if store_path else None
        if samples_manifest:
            self._stats = dataset_stats(samples_manifest)
        else:
            self._stats = DatasetStats(counts={s: 0 for s in Subtype}, total=0)
        if self._path and self._path.exists() and self._path.stat().st_size > 0:
            for event in manifests.read_manifest(self._path, EVENTS_SCHEMA):
                self._apply(event)

    @property
    def revision(self) -> int:
        return self._revision

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "flag":
            case = HardCase.from_dict(event["case"])
            if case.sample_id not in self._cases:
                self._cases[case.sample_id] = case
                insort(self._order, (case.flagged_at, case.sample_id))
                self._revision += 1
        elif kind == "resolve":
            case = self._cases[event["sample_id"]]
            self._cases[case.sample_id] = case.__class__(
                sample_id=case.sample_id,
                label=case.label,
                subtype=case.subtype,
                attempts=case.attempts,
                correction=CoTAnnotation.from_dict(event["correction"]),
                resolved=True,
                flagged_at=case.flagged_at,
            )
            self._revision += 1
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    def _append(self, event: dict) -> None:
        if self._path:
            manifests.append_lines(self._path, EVENTS_SCHEMA, [event])

    # -- mutations ----------------------------------------------------------

    def flag(self, case: HardCase) -> HardCase:
        """Add a case to the queue; re-flagging an existing id is a no-op."""
        with self._lock:
            if case.sample_id in self._cases:
                return self._cases[case.sample_id]
            event = {"event": "flag", "case": case.to_dict()}
            self._append(event)
            self._apply(event)
            return case

    def put_correction(self, sample_id: str, edited: str | CoTAnnotation, expected_revision: int) -> HardCase:
        with self._lock:
            case = self._cases.get(sample_id)
            if case is None:
                raise ApiError(ApiErrorCode.NOT_FOUND, f"no hard case {sample_id!r}")
            if expected_revision != self._revision:
                raise ApiError(
                    ApiErrorCode.CONFLICT,
                    f"expected revision {expected_revision}, store is at {self._revision}",
                    details={"revision": self._revision},
                )
            if case.resolved:
                raise ApiError(ApiErrorCode.CONFLICT, f"case {sample_id!r} already resolved")
            try:
                updated = submit_correction(case, edited, case.label)
            except CorrectionRejectedError as e:
                code = (
                    ApiErrorCode.VALIDATION_FAILED
                    if e.reason is RejectionReason.FORMAT_INVALID
                    else ApiErrorCode.CONCLUSION_MISMATCH
                )
                raise ApiError(code, str(e), details=e.details) from None
            event = {
                "event": "resolve",
                "sample_id": sample_id,
                "correction": updated.correction.to_dict(),
            }
            self._append(event)
            self._apply(event)
            return self._cases[sample_id]

    # -- reads --------------------------------------------------------------

    def get(self, sample_id: str) -> HardCase:
        with self._lock:
            case = self._cases.get(sample_id)
        if case is None:
            raise ApiError(ApiErrorCode.NOT_FOUND, f"no hard case {sample_id!r}")
        return case

    def list_cases(
        self,
        status: str | None = None,
        subtype: str | None = None,
        cursor: str | None = None,
        limit: int = 50,
    ) -> tuple[list[HardCase], str | None]:
        if status not in (None, "pending", "resolved"):
            raise ApiError(ApiErrorCode.BAD_REQUEST, f"bad status filter {status!r}")
        want_subtype = None
        if subtype is not None:
            try:
                want_subtype = Subtype(subtype)
            except ValueError:
                raise ApiError(ApiErrorCode.BAD_REQUEST, f"bad subtype filter {subtype!r}") from None
        if not 1 <= limit <= 500:
            raise ApiError(ApiErrorCode.BAD_REQUEST, f"limit {limit} outside [1, 500]")
        after = decode_cursor(cursor) if cursor else None

        with self._lock:
            keys = list(self._order)
            cases = dict(self._cases)

        out: list[HardCase] = []
        for key in keys:
            if after is not None and key <= after:
                continue
            case = cases[key[1]]
            if status == "pending" and case.resolved:
                continue
            if status == "resolved" and not case.resolved:
                continue
            if want_subtype is not None and case.subtype is not want_subtype:
                continue
            out.append(case)
            if len(out) == limit:
                break
        next_cursor = None
        if len(out) == limit:
            last = out[-1]
            last_key = (last.flagged_at, last.sample_id)
            if last_key != keys[-1]:
                next_cursor = encode_cursor(*last_key)
        return out, next_cursor

    def stats(self) -> dict:
        with self._lock:
            pending = sum(1 for c in self._cases.values() if not c.resolved)
            resolved = len(self._cases) - pending
            revision = self._revision
        return {
            "counts": {s.value: self._stats.counts[s] for s in Subtype},
            "total": self._stats.total,
            "queue": {"pending": pending, "resolved": resolved},
            "revision": revision,
        }


def case_summary(case: HardCase) -> dict:
    return {
        "sample_id": case.sample_id,
        "subtype": case.subtype.value,
        "label": case.label.value,
        "resolved": case.resolved,
        "flagged_at": case.flagged_at,
        "attempt_count": len(case.attempts),
    }


def case_detail(case: HardCase) -> dict:
    """Full record for the review screen: every attempt plus its Strict
    validation report, so the reviewer sees exactly what failed."""
    d = case.to_dict()
    for attempt in d["attempts"]:
        report = validate_annotation(attempt["raw_output"], Strictness.STRICT)
        attempt["validation"] = report.as_dict()
    return d
