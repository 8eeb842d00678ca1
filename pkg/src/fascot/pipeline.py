"""Annotation pipeline: drive an annotator client over sample batches, verify
each output against ground truth, retry once, and flag persistent failures.

A sample is attempted at most max_rounds times (default 2). An attempt is
Accepted when the extracted conclusion equals the ground-truth label; anything
else is retried until rounds run out, then flagged as a hard case for expert
correction. Transport failures are a separate terminal state (ClientError):
they say nothing about the sample's difficulty, only about the client.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Protocol

from . import manifests
from .cot import (
    CANONICAL_ORDER,
    CoTAnnotation,
    CoTSection,
    SectionKind,
    Strictness,
    Verdict,
    extract_conclusion,
    parse_annotation,
    serialize_annotation,
    validate_annotation,
)
from .prompts import PromptBundle, PromptConfig, assemble_prompt
from .taxonomy import SampleRecord, Subtype


class AttemptStatus(Enum):
    ACCEPTED = "Accepted"
    RETRY_SCHEDULED = "RetryScheduled"
    HARD_CASE = "HardCase"
    CLIENT_ERROR = "ClientError"


@dataclass(frozen=True)
class AnnotationAttempt:
    sample_id: str
    round: int
    raw_output: str
    parsed: CoTAnnotation | None
    verdict: Verdict | None
    status: AttemptStatus
    error: str | None = None
    transient_retries: int = 0

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "round": self.round,
            "raw_output": self.raw_output,
            "verdict": self.verdict.value if self.verdict else None,
            "status": self.status.value,
            "error": self.error,
            "transient_retries": self.transient_retries,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationAttempt":
        raw = d["raw_output"]
        return cls(
            sample_id=d["sample_id"],
            round=d["round"],
            raw_output=raw,
            parsed=_try_parse(raw),
            verdict=Verdict(d["verdict"]) if d.get("verdict") else None,
            status=AttemptStatus(d["status"]),
            error=d.get("error"),
            transient_retries=d.get("transient_retries", 0),
        )


def _try_parse(raw: str) -> CoTAnnotation | None:
    try:
        return parse_annotation(raw, Strictness.LENIENT)
    except ValueError:
        return None


class RejectionReason(Enum):
    FORMAT_INVALID = "FormatInvalid"
    CONCLUSION_MISMATCH = "ConclusionMismatch"


class CorrectionRejectedError(ValueError):
    def __init__(self, reason: RejectionReason, details: list | None = None):
        self.reason = reason
        self.details = details or []
        super().__init__(f"correction rejected: {reason.value}")


@dataclass(frozen=True)
class HardCase:
    sample_id: str
    label: Verdict
    subtype: Subtype
    attempts: tuple[AnnotationAttempt, ...]
    correction: CoTAnnotation | None = None
    resolved: bool = False
    flagged_at: float = 0.0

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "label": self.label.value,
            "subtype": self.subtype.value,
            "attempts": [a.to_dict() for a in self.attempts],
            "correction": self.correction.to_dict() if self.correction else None,
            "resolved": self.resolved,
            "flagged_at": self.flagged_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HardCase":
        correction = d.get("correction")
        return cls(
            sample_id=d["sample_id"],
            label=Verdict(d["label"]),
            subtype=Subtype(d["subtype"]),
            attempts=tuple(AnnotationAttempt.from_dict(a) for a in d.get("attempts", [])),
            correction=CoTAnnotation.from_dict(correction) if correction else None,
            resolved=d.get("resolved", False),
            flagged_at=d.get("flagged_at", 0.0),
        )


# ---------------------------------------------------------------------------
# Annotator clients
# ---------------------------------------------------------------------------


class TransientClientError(RuntimeError):
    """Raise for failures worth retrying (timeouts, rate limits, 5xx)."""


class AnnotatorClient(Protocol):
    def complete(self, sample_id: str, round: int, bundle: PromptBundle) -> str: ...


def template_annotation(label: Verdict, note: str = "scripted") -> str:
    """A minimal Strict-valid annotation concluding with the given label."""
    texts = {
        SectionKind.CAPTION: f"A face image under review ({note}).",
        SectionKind.FACIAL_DESCRIPTION: "A single frontal face is visible.",
        SectionKind.FACIAL_ATTRIBUTES: '"eyes": open, "mouth": closed.',
        SectionKind.REASONING: "Texture and context are weighed step by step.",
        SectionKind.SPOOFING_DESCRIPTION: "Presentation-attack cues are assessed.",
        SectionKind.CONCLUSION: label.value,
    }
    return serialize_annotation(
        CoTAnnotation(tuple(CoTSection(k, texts[k]) for k in CANONICAL_ORDER))
    )


class ScriptedMockClient:
    """Deterministic offline client driven by a (sample_id, round, bundle) script.

    The default script returns a valid annotation agreeing with the bundle's
    label, so every sample is accepted in round 1.
    """

    def __init__(self, script: Callable[[str, int, PromptBundle], str] | None = None):
        self._script = script or (lambda sid, rnd, bundle: template_annotation(bundle.label))

    def complete(self, sample_id: str, round: int, bundle: PromptBundle) -> str:
        return self._script(sample_id, round, bundle)


class OpenAICompatibleClient:
    """Live client speaking the chat-completions wire format over HTTP.

    Credentials come from the environment (api_key_env); the image is passed
    by reference as an image_url content part.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "FASCOT_API_KEY",
        timeout: float = 120.0,
        transport=None,
    ):
        import os

        import httpx

        headers = {}
        key = os.environ.get(api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(
            base_url=base_url, headers=headers, timeout=timeout, transport=transport
        )
        self._model = model

    def complete(self, sample_id: str, round: int, bundle: PromptBundle) -> str:
        import httpx

        payload = {
            "model": self._model,
            "messages": [
                {"role": "system", "content": bundle.system_prompt},
                {
                    "role": "user",
                    "content": [
                        {"type": "image_url", "image_url": {"url": bundle.image_ref}},
                        {"type": "text", "text": bundle.user_text()},
                    ],
                },
            ],
        }
        try:
            resp = self._client.post("/chat/completions", json=payload)
        except httpx.TransportError as e:
            raise TransientClientError(str(e)) from e
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientClientError(f"HTTP {resp.status_code}")
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]

    def close(self) -> None:
        self._client.close()


# ---------------------------------------------------------------------------
# Verification and routing
# ---------------------------------------------------------------------------


def verify_and_route(attempt: AnnotationAttempt, truth: Verdict, max_rounds: int) -> AnnotationAttempt:
    """Set the attempt's status from its extracted conclusion.

    Client errors are terminal and pass through untouched.
    """
    if attempt.status is AttemptStatus.CLIENT_ERROR:
        return attempt
    verdict = extract_conclusion(attempt.raw_output)
    if verdict == truth:
        status = AttemptStatus.ACCEPTED
    elif attempt.round < max_rounds:
        status = AttemptStatus.RETRY_SCHEDULED
    else:
        status = AttemptStatus.HARD_CASE
    return replace(attempt, verdict=verdict, status=status)


# ---------------------------------------------------------------------------
# Batch driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    max_rounds: int = 2
    max_transient_retries: int = 2
    backoff_base: float = 0.1
    max_in_flight: int = 8
    prompts: PromptConfig = field(default_factory=PromptConfig)
    log_path: str | None = None
    parse_outputs: bool = True


class AttemptLog:
    """Append-only attempt journal, idempotent by (sample_id, round).

    A crashed run can resume from the journal: completed attempts are reused
    instead of re-calling the client.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._seen: set[tuple[str, int]] = set()
        self._rows: dict[tuple[str, int], dict] = {}
        self._lock = threading.Lock()
        if self.path.exists() and self.path.stat().st_size > 0:
            for row in manifests.read_manifest(self.path, manifests.ATTEMPTS_SCHEMA):
                key = (row["sample_id"], row["round"])
                self._seen.add(key)
                self._rows[key] = row

    def get(self, sample_id: str, round: int) -> dict | None:
        return self._rows.get((sample_id, round))

    def extend(self, attempts: Iterable[AnnotationAttempt]) -> None:
        with self._lock:
            fresh = []
            for a in attempts:
                key = (a.sample_id, a.round)
                if key in self._seen:
                    continue
                self._seen.add(key)
                row = a.to_dict()
                self._rows[key] = row
                fresh.append(row)
            if fresh:
                manifests.append_lines(self.path, manifests.ATTEMPTS_SCHEMA, fresh)


def _invoke(client: AnnotatorClient, sample_id: str, round: int, bundle: PromptBundle, cfg: PipelineConfig):
    """Call the client with bounded retries; never raises."""
    retries = 0
    while True:
        try:
            return client.complete(sample_id, round, bundle), None, retries
        except TransientClientError as e:
            if retries >= cfg.max_transient_retries:
                return None, f"transient: {e}", retries
            if cfg.backoff_base > 0:
                time.sleep(cfg.backoff_base * (2**retries))
            retries += 1
        except Exception as e:  # noqa: BLE001 - a bad sample must not sink the batch
            return None, f"{type(e).__name__}: {e}", retries


def annotate_batch(
    samples: list[SampleRecord],
    client: AnnotatorClient,
    cfg: PipelineConfig | None = None,
) -> list[AnnotationAttempt]:
    """Run the full round loop; returns every attempt, grouped by round in
    input order. The last attempt per sample carries its final status."""
    cfg = cfg or PipelineConfig()
    log = AttemptLog(cfg.log_path) if cfg.log_path else None
    truths = {s.id: s.label for s in samples}
    bundles = {s.id: assemble_prompt(s, cfg.prompts) for s in samples}

    all_attempts: list[AnnotationAttempt] = []
    pending = list(samples)
    for round_no in range(1, cfg.max_rounds + 1):
        if not pending:
            break
        to_call = []
        reused: dict[str, AnnotationAttempt] = {}
        for s in pending:
            row = log.get(s.id, round_no) if log else None
            if row is not None:
                reused[s.id] = AnnotationAttempt.from_dict(row)
            else:
                to_call.append(s)

        results: dict[str, tuple] = {}
        if to_call:
            with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as ex:
                outs = ex.map(
                    lambda s: _invoke(client, s.id, round_no, bundles[s.id], cfg), to_call
                )
                for s, out in zip(to_call, outs):
                    results[s.id] = out

        round_attempts: list[AnnotationAttempt] = []
        for s in pending:
            if s.id in reused:
                attempt = verify_and_route(reused[s.id], truths[s.id], cfg.max_rounds)
            else:
                raw, error, retries = results[s.id]
                if raw is None:
                    attempt = AnnotationAttempt(
                        s.id, round_no, "", None, None, AttemptStatus.CLIENT_ERROR, error, retries
                    )
                else:
                    attempt = AnnotationAttempt(
                        sample_id=s.id,
                        round=round_no,
                        raw_output=raw,
                        parsed=_try_parse(raw) if cfg.parse_outputs else None,
                        verdict=None,
                        status=AttemptStatus.RETRY_SCHEDULED,
                        transient_retries=retries,
                    )
                    attempt = verify_and_route(attempt, truths[s.id], cfg.max_rounds)
            round_attempts.append(attempt)

        if log:
            log.extend(round_attempts)
        all_attempts.extend(round_attempts)
        retry_ids = {a.sample_id for a in round_attempts if a.status is AttemptStatus.RETRY_SCHEDULED}
        pending = [s for s in pending if s.id in retry_ids]

    return all_attempts


def final_statuses(attempts: Iterable[AnnotationAttempt]) -> dict[str, AttemptStatus]:
    """Last round wins; RetryScheduled never survives a completed run."""
    out: dict[str, AttemptStatus] = {}
    rounds: dict[str, int] = {}
    for a in attempts:
        if a.sample_id not in out or a.round >= rounds[a.sample_id]:
            out[a.sample_id] = a.status
            rounds[a.sample_id] = a.round
    return out


def collect_hardcases(
    attempts: Iterable[AnnotationAttempt], samples: list[SampleRecord]
) -> list[HardCase]:
    """Bundle every hard-flagged sample with its full attempt history."""
    by_sample: dict[str, list[AnnotationAttempt]] = {}
    for a in attempts:
        by_sample.setdefault(a.sample_id, []).append(a)
    records = {s.id: s for s in samples}
    cases = []
    for i, s in enumerate(samples):
        history = by_sample.get(s.id, [])
        if history and history[-1].status is AttemptStatus.HARD_CASE:
            cases.append(
                HardCase(
                    sample_id=s.id,
                    label=records[s.id].label,
                    subtype=records[s.id].subtype,
                    attempts=tuple(history),
                    flagged_at=float(i),
                )
            )
    return cases


# ---------------------------------------------------------------------------
# Expert correction gate
# ---------------------------------------------------------------------------


def submit_correction(hc: HardCase, edited: CoTAnnotation | str, truth: Verdict) -> HardCase:
    """Accept an expert edit only when Strict-valid and agreeing with truth.

    Raw text is validated in full; a structured CoTAnnotation is valid by
    construction. Rejections raise and leave the case untouched.
    """
    if isinstance(edited, str):
        report = validate_annotation(edited, Strictness.STRICT)
        if not report.ok:
            raise CorrectionRejectedError(
                RejectionReason.FORMAT_INVALID, [e.as_dict() for e in report.errors]
            )
        annotation = parse_annotation(edited, Strictness.STRICT)
    else:
        annotation = edited
    if annotation.verdict != truth:
        raise CorrectionRejectedError(
            RejectionReason.CONCLUSION_MISMATCH,
            [{"expected": truth.value, "got": annotation.verdict.value}],
        )
    return replace(hc, correction=annotation, resolved=True)
