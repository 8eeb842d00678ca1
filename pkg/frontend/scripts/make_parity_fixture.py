"""Regenerate test/fixtures/parity.json.

Builds 200 annotation texts (valid ones plus systematic breakages), asks the
review service's POST /validate for its strict verdict on each, and records
{text, ok, codes}. The frontend test suite replays the corpus against the
client-side validator, so the two implementations are compared against the
same bytes. Texts stay within characters that Python and JS agree on for
whitespace and case folding; the divergent code points (U+0085, U+001C-001F,
sharp s) are intentionally absent.

Usage: python3 scripts/make_parity_fixture.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from fastapi.testclient import TestClient

from fascot.service import HardCaseStore, create_app

SECTIONS = [
    "Caption",
    "Facial Description",
    "Facial Attributes",
    "Reasoning",
    "Spoofing Description",
    "Conclusion",
]

WORDS = (
    "texture reflection moire paper screen edge contour skin specular natural "
    "uniform frontal occlusion boundary halo glare pixel grid seam matte"
).split()

SAFE_SPACES = [" ", "\t", "\n", " ", " ", "　"]


def prose(rng: random.Random, lo: int = 3, hi: int = 10) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def base_sections(rng: random.Random) -> dict[str, str]:
    body = {name: prose(rng) for name in SECTIONS}
    body["Conclusion"] = rng.choice(["Yes", "No"])
    return body


def render(body: dict[str, str], order: list[str] | None = None, sep: str = "\n") -> str:
    names = order if order is not None else SECTIONS
    return sep.join(f"<{n}>{body[n]}</{n}>" for n in names)


def mutate(rng: random.Random, kind: int) -> str:
    body = base_sections(rng)
    if kind == 0:  # valid, newline separated
        return render(body)
    if kind == 1:  # valid, mixed exotic-but-shared whitespace between sections
        return render(body, sep=rng.choice(SAFE_SPACES) * rng.randint(1, 3))
    if kind == 2:  # valid, verdict with trailing terminal punctuation
        body["Conclusion"] = rng.choice(["Yes.", "No!", "Yes ;", "no.　", "YES .."])
        return render(body)
    if kind == 3:  # missing one section
        victim = rng.choice(SECTIONS)
        return render(body, [n for n in SECTIONS if n != victim])
    if kind == 4:  # duplicated section
        victim = rng.choice(SECTIONS)
        return render(body) + f"\n<{victim}>{prose(rng)}</{victim}>"
    if kind == 5:  # two sections swapped
        order = list(SECTIONS)
        i = rng.randrange(len(order) - 1)
        order[i], order[i + 1] = order[i + 1], order[i]
        return render(body, order)
    if kind == 6:  # prose between sections (stray text under strict)
        parts = [f"<{n}>{body[n]}</{n}>" for n in SECTIONS]
        parts.insert(rng.randint(1, len(parts) - 1), prose(rng, 2, 4))
        return "\n".join(parts)
    if kind == 7:  # case-folded tag pair (near miss)
        victim = rng.choice(SECTIONS)
        text = render(body, [n for n in SECTIONS if n != victim])
        lowered = victim.lower().replace(" ", "")
        return text + f"\n<{lowered}>{prose(rng)}</{lowered}>"
    if kind == 8:  # unclosed final section
        order = SECTIONS[:-1]
        return render(body, list(order)) + f"\n<Conclusion>{body['Conclusion']}"
    if kind == 9:  # blank body
        victim = rng.choice(SECTIONS[:-1])
        body[victim] = rng.choice(["", " ", " \t"])
        return render(body)
    if kind == 10:  # conclusion not a bare verdict
        body["Conclusion"] = rng.choice(
            ["Probably yes", "It is a spoof", "Yes and no", "unsure", "Yes, clearly"]
        )
        return render(body)
    if kind == 11:  # nested open tag inside a section
        victim = rng.choice(SECTIONS[:-1])
        body[victim] = f"{prose(rng, 2, 4)} <Reasoning> {prose(rng, 2, 4)}"
        return render(body)
    if kind == 12:  # close without a matching open
        return f"</{rng.choice(SECTIONS)}>\n" + render(body)
    if kind == 13:  # unknown angle-bracket token outside (prose token)
        return render(body) + "\n<" + rng.choice(["see appendix", "img src=x", "!--note--"]) + ">"
    if kind == 14:  # interleaved close (open A, open B before A closes)
        return (
            f"<Caption>{prose(rng)}</Caption>\n"
            f"<Facial Description>{prose(rng)} <Facial Attributes>{prose(rng)}"
            f"</Facial Description>{prose(rng)}</Facial Attributes>\n"
            + render(body, SECTIONS[3:])
        )
    if kind == 15:  # verdict padded with shared unicode whitespace
        body["Conclusion"] = f"  {rng.choice(['Yes', 'No'])}　 "
        return render(body)
    raise AssertionError(kind)


def main() -> None:
    rng = random.Random(20250825)
    texts = [mutate(rng, i % 16) for i in range(200)]

    client = TestClient(create_app(HardCaseStore()))
    entries = []
    for text in texts:
        resp = client.post("/validate", json={"text": text})
        resp.raise_for_status()
        report = resp.json()
        entries.append(
            {
                "text": text,
                "ok": report["ok"],
                "codes": sorted(e["code"] for e in report["errors"]),
            }
        )

    n_ok = sum(1 for e in entries if e["ok"])
    out = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "parity.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(entries, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(entries)} entries ({n_ok} valid) to {out}")


if __name__ == "__main__":
    main()
