"""Face anti-spoofing CoT annotation tooling.

Core pieces: the six-section annotation grammar (cot), the annotation
pipeline with verification and hard-case triage (pipeline), dual reward
scoring (rewards), balanced dataset manifests (dataset), HTER/AUC/EER
evaluation (metrics), and the review service (service).
"""

__version__ = "0.1.0"

from .cot import (
    CANONICAL_ORDER,
    CoTAnnotation,
    CoTSection,
    SectionKind,
    Strictness,
    ValidationReport,
    Verdict,
    extract_conclusion,
    parse_annotation,
    serialize_annotation,
    validate_annotation,
)
from .taxonomy import Category, SampleRecord, Subtype

__all__ = [
    "CANONICAL_ORDER",
    "Category",
    "CoTAnnotation",
    "CoTSection",
    "SampleRecord",
    "SectionKind",
    "Strictness",
    "Subtype",
    "ValidationReport",
    "Verdict",
    "extract_conclusion",
    "parse_annotation",
    "serialize_annotation",
    "validate_annotation",
    "__version__",
]
