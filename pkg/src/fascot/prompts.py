"""Prompt assembly for the annotation pipeline.

A prompt bundle has five parts: image, system prompt, question, optional
subtype hint, and the ground-truth label the annotator must agree with.
The default texts are fixed; annotated corpora depend on them byte-for-byte,
so the system prompt keeps its historical quirks (the "facical" spelling and
the curly quotes) and must not be "fixed".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .cot import Verdict
from .taxonomy import SampleRecord, Subtype, UnknownSubtypeError

EXAMINER_SYSTEM_PROMPT = (
    "In a face anti-spoofing detection system, a person has submitted an image for "
    "inspection. Now please assume the role of the examiner and respond to the question. "
    "I need you to strictly follow the format containing six specific parts: caption, "
    "facical description, facial attributes, reasoning, spoofing description, and "
    "conclusion. It is crucial that you adhere exactly to the outlined structure, and "
    "that the final answer in conclusion matches the standard correct answer exactly. "
    "Further explanation: In caption, provide a holistic description of the image. In "
    "facial description, focus on describing the facial features of the person in the "
    "image. In facial attributes, list the facial attributes. In reasoning, perform "
    "step-by-step logical reasoning based on the image description, facial description, "
    "and facial attributes. In spoofing description, describe the spoofing method and "
    "highlight the critical spoofing characteristics in detail. In conclusion, give the "
    "final answer “Yes” or “No” that must match the standard answer "
    "exactly. Format as follows: <Caption> [Holistic description of the image] "
    "</Caption> <Facial Description> [Detailed description of the person’s facial "
    "features] </Facial Description> <Facial Attributes> [Describe facial attributes: "
    "\"eyes\": ..., \"mouth\": ...etc.] </Facial Attributes> <Reasoning> [Step-by-step "
    "logical reasoning based on the above] </Reasoning> <Spoofing Description> [Details "
    "of the spoofing method: ...] </Spoofing Description> <Conclusion> [Answer "
    "“Yes” or “No” matching the standard answer exactly] "
    "</Conclusion> Please carefully apply this format to analyze the given image and "
    "answer the related question."
)

# Default question text; not fixed by the annotation protocol, so it is
# configurable and this default is just ours.
DEFAULT_QUESTION = (
    "Is the face in this image a spoofing attack? Please answer the question "
    "following the required format."
)

# Subtypes without an entry get no hint; they are the ones annotators already
# classify reliably (Living and the mask family).
DEFAULT_HINTS: dict[Subtype, str] = {
    Subtype.PHOTO: "Photographing a printed photo constitutes spoofing.",
    Subtype.NEWSPAPER: "Photographing a newspaper page constitutes spoofing.",
    Subtype.POSTER: "Photographing a poster constitutes spoofing.",
    Subtype.ALBUM: "Photographing an album page constitutes spoofing.",
    Subtype.A4: "Photographing an A4-printed image constitutes spoofing.",
    Subtype.FACIAL_PRINT: "Photographing a facial photo constitutes spoofing.",
    Subtype.UPPER_BODY: "Photographing a printed upper-body image constitutes spoofing.",
    Subtype.PHONE: "Photographing a phone screen constitutes spoofing.",
    Subtype.PAD: "Photographing a tablet display constitutes spoofing.",
    Subtype.PC: "Photographing a computer screen constitutes spoofing.",
}


@dataclass(frozen=True)
class PromptConfig:
    system_prompt: str = EXAMINER_SYSTEM_PROMPT
    question: str = DEFAULT_QUESTION
    hints: dict[Subtype, str] = field(default_factory=lambda: dict(DEFAULT_HINTS))

    @classmethod
    def from_file(cls, path: str | Path) -> "PromptConfig":
        """Load overrides from a JSON file; absent keys keep the defaults."""
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        hints = dict(DEFAULT_HINTS)
        if "hints" in raw:
            hints = {}
            for name, text in raw["hints"].items():
                try:
                    hints[Subtype(name)] = text
                except ValueError:
                    raise UnknownSubtypeError(name) from None
        return cls(
            system_prompt=raw.get("system_prompt", EXAMINER_SYSTEM_PROMPT),
            question=raw.get("question", DEFAULT_QUESTION),
            hints=hints,
        )


@dataclass(frozen=True)
class PromptBundle:
    image_ref: str
    system_prompt: str
    question: str
    hint: str | None
    label: Verdict

    def user_text(self) -> str:
        """Question, hint, and expected answer concatenated for wire clients."""
        parts = [self.question]
        if self.hint is not None:
            parts.append(f"Hint: {self.hint}")
        parts.append(f"The standard answer is: {self.label.value}.")
        return "\n".join(parts)


def assemble_prompt(s: SampleRecord, cfg: PromptConfig | None = None) -> PromptBundle:
    """Build the bundle for one sample; hint presence is decided by subtype."""
    cfg = cfg or PromptConfig()
    if not isinstance(s.subtype, Subtype):
        raise UnknownSubtypeError(s.subtype)
    return PromptBundle(
        image_ref=s.image_ref,
        system_prompt=cfg.system_prompt,
        question=cfg.question,
        hint=cfg.hints.get(s.subtype),
        label=s.label,
    )
