"""Shared generators: random valid annotations and fuzzed raw outputs."""

from __future__ import annotations

import random

import hypothesis.strategies as st

from fascot.cot import (
    ALL_TAG_TOKENS,
    CANONICAL_ORDER,
    CoTAnnotation,
    CoTSection,
    SectionKind,
)

_WORDS = [
    "face", "texture", "moire", "screen", "edge", "paper", "glare", "skin",
    "mask", "boundary", "frame", "natural", "lighting", "frontal", "subtle",
    "bezel", "pixel", "grain", "shadow", "contour", "reflection",
]
_SPRINKLES = [
    "", " ", "  ", "\n", "\t", ", ", "; ", ": ", " <caption> ", " < Reasoning > ",
    " </Conclusion ", " <x> ", " 42% ", " “quoted” ", " a<b ", " b>c ",
]
_CONCLUSION_CORES = ["Yes", "No", "yes", "no", "YES", "NO", "yEs", "nO"]
_TRAILERS = ["", ".", "!", ";", ". ", " .", ".;!", " . ; ", ".\n", " .", ".  "]
_LEADERS = ["", " ", "\t", "\n ", " "]


def random_section_text(rng: random.Random) -> str:
    parts = []
    for _ in range(rng.randint(1, 8)):
        parts.append(rng.choice(_WORDS))
        parts.append(rng.choice(_SPRINKLES))
    text = " ".join(p for p in parts if p) or "plain"
    assert not any(tok in text for tok in ALL_TAG_TOKENS)
    return text


def random_conclusion_text(rng: random.Random) -> str:
    return rng.choice(_LEADERS) + rng.choice(_CONCLUSION_CORES) + rng.choice(_TRAILERS)


def random_annotation(rng: random.Random) -> CoTAnnotation:
    sections = []
    for kind in CANONICAL_ORDER:
        if kind is SectionKind.CONCLUSION:
            sections.append(CoTSection(kind, random_conclusion_text(rng)))
        else:
            sections.append(CoTSection(kind, random_section_text(rng)))
    return CoTAnnotation(tuple(sections))


# Fuzz vocabulary for conclusion extraction: tag fragments, near-tags, verdict
# words, junk, and unusual whitespace.
_FUZZ_PIECES = [
    "<Conclusion>", "</Conclusion>", "<conclusion>", "</conclusion>",
    "<Conclusion >", "< /Conclusion>", "<Conclusion", "Conclusion>", "</Conclusion",
    "<Caption>", "</Caption>", "<>", "<", ">", "",
    "Yes", "No", "yes", "no", "YES.", "nO ;", "maybe", "Yes, spoofed", "No no",
    " ", "  ", "\n", "\t", " ", " ", ".", "!", ";", ". ; !",
    "junk", "the image", "spoof", "live",
]


def random_fuzz_string(rng: random.Random) -> str:
    return "".join(rng.choice(_FUZZ_PIECES) for _ in range(rng.randint(0, 14)))


# ---------------------------------------------------------------------------
# Hypothesis strategies
# ---------------------------------------------------------------------------

_body_chars = st.characters(blacklist_categories=("Cs",))


def _clean_body(t: str) -> bool:
    return bool(t.strip()) and not any(tok in t for tok in ALL_TAG_TOKENS)


section_text_st = st.text(_body_chars, min_size=1, max_size=40).filter(_clean_body)

conclusion_text_st = st.builds(
    lambda lead, core, trail: lead + core + trail,
    st.sampled_from(_LEADERS),
    st.sampled_from(_CONCLUSION_CORES),
    st.sampled_from(_TRAILERS),
)


@st.composite
def annotation_st(draw) -> CoTAnnotation:
    sections = []
    for kind in CANONICAL_ORDER:
        text = draw(conclusion_text_st if kind is SectionKind.CONCLUSION else section_text_st)
        sections.append(CoTSection(kind, text))
    return CoTAnnotation(tuple(sections))


# ---------------------------------------------------------------------------
# Acceptance reporting: each test in test_acceptance.py registers one line
# here; the terminal summary prints them all so results stay visible even
# under captured output.
# ---------------------------------------------------------------------------

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def record_acceptance(key: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[key] = (ok, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'} - {detail}")
