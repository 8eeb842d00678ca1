"""Six-section chain-of-thought annotation model and its tag grammar.

An annotation is six tagged sections in a fixed order::

    <Caption>...</Caption> <Facial Description>...</Facial Description>
    <Facial Attributes>...</Facial Attributes> <Reasoning>...</Reasoning>
    <Spoofing Description>...</Spoofing Description> <Conclusion>...</Conclusion>

Tag names are case-sensitive and non-recursive: a section may not contain
another tag pair. Two parsing modes exist. Strict requires all six pairs,
canonical order, and nothing but whitespace outside the tags; it is the bar
used by the format reward. Lenient tolerates out-of-order sections and
surrounding prose (typical of raw model output) but still requires each pair
exactly once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class SectionKind(Enum):
    CAPTION = "Caption"
    FACIAL_DESCRIPTION = "Facial Description"
    FACIAL_ATTRIBUTES = "Facial Attributes"
    REASONING = "Reasoning"
    SPOOFING_DESCRIPTION = "Spoofing Description"
    CONCLUSION = "Conclusion"

    @property
    def tag_name(self) -> str:
        return self.value

    @property
    def field_name(self) -> str:
        return self.name.lower()


CANONICAL_ORDER: tuple[SectionKind, ...] = tuple(SectionKind)

_OPEN_TOKENS = {f"<{k.tag_name}>": k for k in SectionKind}
_CLOSE_TOKENS = {f"</{k.tag_name}>": k for k in SectionKind}
ALL_TAG_TOKENS: frozenset[str] = frozenset(_OPEN_TOKENS) | frozenset(_CLOSE_TOKENS)

# Any angle-bracketed run; candidates are classified afterwards.
_ANGLED_RE = re.compile(r"</?[^<>]*>")

# Section names with whitespace removed and case folded, for near-miss detection.
_FOLDED_NAMES = {k.tag_name.replace(" ", "").casefold(): k for k in SectionKind}

# Trailing mix of whitespace and terminal punctuation (. ! ;).
_TERMINAL_TRIM_RE = re.compile(r"[\s.!;]+\Z")


class Verdict(Enum):
    """Final answer of an annotation. YES means spoofing is present."""

    YES = "Yes"
    NO = "No"


class Strictness(Enum):
    STRICT = "strict"
    LENIENT = "lenient"


# ---------------------------------------------------------------------------
# Errors. These double as validation-report entries, so each carries a stable
# wire code and whatever locating detail is available.
# ---------------------------------------------------------------------------


class AnnotationError(ValueError):
    code = "AnnotationError"

    def as_dict(self) -> dict:
        d: dict = {"code": self.code, "message": str(self)}
        kind = getattr(self, "kind", None)
        if kind is not None:
            d["section"] = kind.tag_name
        position = getattr(self, "position", None)
        if position is not None:
            d["position"] = position
        return d


class MissingSectionError(AnnotationError):
    code = "MissingSection"

    def __init__(self, kind: SectionKind):
        self.kind = kind
        super().__init__(f"missing section <{kind.tag_name}>")


class DuplicateSectionError(AnnotationError):
    code = "DuplicateSection"

    def __init__(self, kind: SectionKind, count: int):
        self.kind = kind
        self.count = count
        super().__init__(f"section <{kind.tag_name}> appears {count} times")


class MalformedTagError(AnnotationError):
    code = "MalformedTag"

    def __init__(self, position: int, reason: str):
        self.position = position
        super().__init__(f"{reason} at offset {position}")


class OutOfOrderError(AnnotationError):
    code = "OutOfOrder"

    def __init__(self, kind: SectionKind):
        self.kind = kind
        super().__init__(f"section <{kind.tag_name}> out of canonical order")


class EmptySectionError(AnnotationError):
    code = "EmptySection"

    def __init__(self, kind: SectionKind):
        self.kind = kind
        super().__init__(f"section <{kind.tag_name}> is empty")


class InvalidConclusionError(AnnotationError):
    code = "InvalidConclusion"

    def __init__(self, text: str):
        self.text = text
        super().__init__(f"conclusion {text!r} does not normalize to Yes or No")


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoTSection:
    kind: SectionKind
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise EmptySectionError(self.kind)
        for token in ALL_TAG_TOKENS:
            if token in self.text:
                raise MalformedTagError(self.text.index(token), f"tag {token} inside section text")


@dataclass(frozen=True)
class CoTAnnotation:
    """Exactly one section per kind, held in canonical order."""

    sections: tuple[CoTSection, ...]

    def __post_init__(self):
        kinds = tuple(s.kind for s in self.sections)
        if kinds != CANONICAL_ORDER:
            missing = [k for k in CANONICAL_ORDER if k not in kinds]
            if missing:
                raise MissingSectionError(missing[0])
            for k in CANONICAL_ORDER:
                n = kinds.count(k)
                if n > 1:
                    raise DuplicateSectionError(k, n)
            raise OutOfOrderError(next(k for i, k in enumerate(kinds) if k != CANONICAL_ORDER[i]))
        if self.verdict is None:
            raise InvalidConclusionError(self.section(SectionKind.CONCLUSION).text)

    def section(self, kind: SectionKind) -> CoTSection:
        return self.sections[CANONICAL_ORDER.index(kind)]

    @property
    def verdict(self) -> Verdict | None:
        return normalize_verdict(self.section(SectionKind.CONCLUSION).text)

    @classmethod
    def from_texts(cls, **texts: str) -> "CoTAnnotation":
        """Build from the six field names (caption, facial_description, ...)."""
        expected = [k.field_name for k in CANONICAL_ORDER]
        unknown = set(texts) - set(expected)
        if unknown:
            raise TypeError(f"unknown section fields: {sorted(unknown)}")
        for name, kind in zip(expected, CANONICAL_ORDER):
            if name not in texts:
                raise MissingSectionError(kind)
        return cls(tuple(CoTSection(k, texts[k.field_name]) for k in CANONICAL_ORDER))

    def to_dict(self) -> dict[str, str]:
        """Structured wire form: one object with six named string fields."""
        return {s.kind.field_name: s.text for s in self.sections}

    @classmethod
    def from_dict(cls, d: dict[str, str]) -> "CoTAnnotation":
        return cls.from_texts(**d)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    errors: tuple[AnnotationError, ...]

    def as_dict(self) -> dict:
        return {"ok": self.ok, "errors": [e.as_dict() for e in self.errors]}


# ---------------------------------------------------------------------------
# Conclusion normalization and extraction
# ---------------------------------------------------------------------------


def normalize_verdict(text: str) -> Verdict | None:
    """Map free text to a verdict: trim, drop terminal punctuation, case-fold.

    Only exact matches count; "Yes, it is spoofed" is not a verdict.
    """
    t = _TERMINAL_TRIM_RE.sub("", text.strip()).casefold()
    if t == "yes":
        return Verdict.YES
    if t == "no":
        return Verdict.NO
    return None


_CONCLUSION_OPEN = f"<{SectionKind.CONCLUSION.tag_name}>"
_CONCLUSION_CLOSE = f"</{SectionKind.CONCLUSION.tag_name}>"


def extract_conclusion(text: str) -> Verdict | None:
    """Pull the verdict out of raw, possibly malformed model output.

    Uses the first <Conclusion>...</Conclusion> span; returns None when the
    span is absent or its content does not normalize to Yes/No. Never raises.
    """
    start = text.find(_CONCLUSION_OPEN)
    if start < 0:
        return None
    inner = start + len(_CONCLUSION_OPEN)
    end = text.find(_CONCLUSION_CLOSE, inner)
    if end < 0:
        return None
    return normalize_verdict(text[inner:end])


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


@dataclass
class _RawSection:
    kind: SectionKind
    text: str
    open_pos: int
    end_pos: int


def _classify(token: str) -> tuple[str, SectionKind | None]:
    if token in _OPEN_TOKENS:
        return "open", _OPEN_TOKENS[token]
    if token in _CLOSE_TOKENS:
        return "close", _CLOSE_TOKENS[token]
    inner = token[1:-1]
    if inner.startswith("/"):
        inner = inner[1:]
    folded = "".join(inner.split()).casefold()
    if folded in _FOLDED_NAMES:
        return "near_miss", _FOLDED_NAMES[folded]
    return "prose", None


def _analyze(text: str, strictness: Strictness) -> tuple[list[_RawSection], list[AnnotationError]]:
    """Single pass shared by parse and validate; collects every violation."""
    errors: list[AnnotationError] = []
    sections: list[_RawSection] = []
    # Spans already accounted for (sections, abandoned opens, bad tokens), so
    # the strict stray-text check does not re-report them.
    consumed: list[tuple[int, int]] = []

    open_kind: SectionKind | None = None
    open_pos = 0
    text_start = 0

    def abandon(upto: int) -> None:
        nonlocal open_kind
        consumed.append((open_pos, upto))
        open_kind = None

    for m in _ANGLED_RE.finditer(text):
        token = m.group()
        role, kind = _classify(token)
        if role == "prose":
            continue
        if role == "near_miss":
            if open_kind is None:
                errors.append(MalformedTagError(m.start(), f"malformed tag {token!r}"))
                consumed.append((m.start(), m.end()))
            continue
        if role == "open":
            if open_kind is not None:
                errors.append(
                    MalformedTagError(m.start(), f"tag {token} opened inside <{open_kind.tag_name}>")
                )
                abandon(m.start())
            open_kind = kind
            open_pos = m.start()
            text_start = m.end()
        else:  # close
            if open_kind is None:
                errors.append(MalformedTagError(m.start(), f"closing tag {token} without matching open"))
                consumed.append((m.start(), m.end()))
            elif kind is not open_kind:
                errors.append(
                    MalformedTagError(m.start(), f"closing tag {token} inside <{open_kind.tag_name}>")
                )
                abandon(m.end())
            else:
                sections.append(_RawSection(kind, text[text_start : m.start()], open_pos, m.end()))
                consumed.append((open_pos, m.end()))
                open_kind = None

    if open_kind is not None:
        errors.append(MalformedTagError(open_pos, f"<{open_kind.tag_name}> never closed"))
        abandon(len(text))

    if strictness is Strictness.STRICT:
        errors.extend(_stray_text_errors(text, consumed))
        seen_max = -1
        for raw in sections:
            idx = CANONICAL_ORDER.index(raw.kind)
            if idx < seen_max:
                errors.append(OutOfOrderError(raw.kind))
            seen_max = max(seen_max, idx)

    for raw in sections:
        if not raw.text.strip():
            errors.append(EmptySectionError(raw.kind))

    counts = {k: sum(1 for s in sections if s.kind is k) for k in CANONICAL_ORDER}
    for k in CANONICAL_ORDER:
        if counts[k] == 0:
            errors.append(MissingSectionError(k))
        elif counts[k] > 1:
            errors.append(DuplicateSectionError(k, counts[k]))

    if counts[SectionKind.CONCLUSION] == 1:
        conclusion = next(s for s in sections if s.kind is SectionKind.CONCLUSION)
        if conclusion.text.strip() and normalize_verdict(conclusion.text) is None:
            errors.append(InvalidConclusionError(conclusion.text.strip()))

    return sections, errors


def _stray_text_errors(text: str, consumed: list[tuple[int, int]]) -> list[AnnotationError]:
    spans = sorted(consumed)
    errors = []
    cursor = 0
    for start, end in spans + [(len(text), len(text))]:
        gap = text[cursor:start]
        if gap.strip():
            offset = cursor + (len(gap) - len(gap.lstrip()))
            errors.append(MalformedTagError(offset, "text outside sections"))
        cursor = max(cursor, end)
    return errors


def parse_annotation(text: str, strictness: Strictness = Strictness.STRICT) -> CoTAnnotation:
    """Parse tagged text into an annotation, raising the first violation found."""
    sections, errors = _analyze(text, strictness)
    if errors:
        raise errors[0]
    ordered = sorted(sections, key=lambda s: CANONICAL_ORDER.index(s.kind))
    return CoTAnnotation(tuple(CoTSection(s.kind, s.text) for s in ordered))


def validate_annotation(text: str, strictness: Strictness = Strictness.STRICT) -> ValidationReport:
    """Report every independent violation instead of stopping at the first."""
    _, errors = _analyze(text, strictness)
    return ValidationReport(ok=not errors, errors=tuple(errors))


def serialize_annotation(a: CoTAnnotation) -> str:
    """Canonical text form: six tag pairs, single spaces between sections."""
    return " ".join(f"<{s.kind.tag_name}>{s.text}</{s.kind.tag_name}>" for s in a.sections)
