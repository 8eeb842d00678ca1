"""Wire models for the review service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    version: str
    revision: int


class HardCaseSummary(BaseModel):
    sample_id: str
    subtype: str
    label: str
    resolved: bool
    flagged_at: float
    attempt_count: int


class HardCasePage(BaseModel):
    items: list[HardCaseSummary]
    next_cursor: str | None = None


class CorrectionRequest(BaseModel):
    """Either raw tagged text or the six named sections, plus the revision the
    client last saw (optimistic concurrency)."""

    text: str | None = None
    sections: dict[str, str] | None = None
    expected_revision: int


class ScoreItem(BaseModel):
    id: str | None = None
    raw_output: str
    truth: Literal["Yes", "No"]


class ScoreRequest(BaseModel):
    items: list[ScoreItem] = Field(default_factory=list)


class ValidateRequest(BaseModel):
    text: str
    strictness: Literal["strict", "lenient"] = "strict"


class ValidateResponse(BaseModel):
    ok: bool
    errors: list[dict]


class QueueSummary(BaseModel):
    pending: int
    resolved: int


class StatsResponse(BaseModel):
    counts: dict[str, int]
    total: int
    queue: QueueSummary
    revision: int
