import { readFileSync } from "node:fs";

import { describe, expect, it } from "vitest";

import {
  SECTION_NAMES,
  assembleSections,
  extractConclusion,
  normalizeVerdict,
  validateLenient,
  validateStrict,
} from "../src/validation.js";
import type { SectionsPayload } from "../src/types.js";

interface ParityEntry {
  text: string;
  ok: boolean;
  codes: string[];
}

const corpus: ParityEntry[] = JSON.parse(
  readFileSync(new URL("./fixtures/parity.json", import.meta.url), "utf8"),
);

const FILLED: SectionsPayload = {
  caption: "A face fills most of the frame.",
  facial_description: "One adult face, frontal, evenly lit.",
  facial_attributes: '"skin": matte, "eyes": open.',
  reasoning: "No moire, no paper edges, natural specular highlights.",
  spoofing_description: "No presentation-attack artifacts found.",
  conclusion: "No",
};

const VALID_TEXT = assembleSections(FILLED);

describe("server parity corpus", () => {
  it("has the expected size and a mix of verdicts", () => {
    expect(corpus).toHaveLength(200);
    const valid = corpus.filter((e) => e.ok).length;
    expect(valid).toBeGreaterThan(20);
    expect(valid).toBeLessThan(180);
  });

  it("matches the service verdict on every entry", () => {
    for (const entry of corpus) {
      const report = validateStrict(entry.text);
      expect(report.ok, `verdict drift on: ${JSON.stringify(entry.text.slice(0, 80))}`).toBe(entry.ok);
    }
  });

  it("matches the service error codes on every entry", () => {
    for (const entry of corpus) {
      const codes = validateStrict(entry.text).errors.map((e) => e.code).sort();
      expect(codes, `code drift on: ${JSON.stringify(entry.text.slice(0, 80))}`).toEqual(entry.codes);
    }
  });
});

describe("validateStrict", () => {
  it("accepts a canonical six-section annotation", () => {
    const report = validateStrict(VALID_TEXT);
    expect(report.ok).toBe(true);
    expect(report.errors).toEqual([]);
  });

  it("flags a missing section", () => {
    const text = SECTION_NAMES.filter((n) => n !== "Reasoning")
      .map((n) => `<${n}>${n === "Conclusion" ? "No" : "body"}</${n}>`)
      .join("\n");
    const codes = validateStrict(text).errors.map((e) => e.code);
    expect(codes).toContain("MissingSection");
  });

  it("flags a duplicated section", () => {
    const text = `${VALID_TEXT}\n<Caption>again</Caption>`;
    const codes = validateStrict(text).errors.map((e) => e.code);
    expect(codes).toContain("DuplicateSection");
  });

  it("flags out-of-order sections under strict only", () => {
    const order = [...SECTION_NAMES];
    [order[0], order[1]] = [order[1]!, order[0]!];
    const text = order
      .map((n) => `<${n}>${n === "Conclusion" ? "Yes" : "body"}</${n}>`)
      .join("\n");
    expect(validateStrict(text).errors.map((e) => e.code)).toContain("OutOfOrder");
    expect(validateLenient(text).ok).toBe(true);
  });

  it("flags prose outside sections under strict only", () => {
    const text = `preamble text\n${VALID_TEXT}`;
    expect(validateStrict(text).errors.map((e) => e.code)).toContain("MalformedTag");
    expect(validateLenient(text).ok).toBe(true);
  });

  it("flags a case-folded tag outside sections as a near miss", () => {
    const text = `${VALID_TEXT}\n<caption>x</caption>`;
    const malformed = validateStrict(text).errors.filter((e) => e.code === "MalformedTag");
    expect(malformed.length).toBeGreaterThan(0);
  });

  it("ignores a case-folded tag inside a section body", () => {
    const text = VALID_TEXT.replace(
      FILLED.reasoning,
      `${FILLED.reasoning} <reasoning> aside`,
    );
    expect(validateStrict(text).ok).toBe(true);
  });

  it("flags a blank section body", () => {
    const text = VALID_TEXT.replace(FILLED.caption, " \t ");
    expect(validateStrict(text).errors.map((e) => e.code)).toContain("EmptySection");
  });

  it("flags a non-verdict conclusion", () => {
    const text = VALID_TEXT.replace(">No</Conclusion>", ">Hard to say</Conclusion>");
    expect(validateStrict(text).errors.map((e) => e.code)).toContain("InvalidConclusion");
  });

  it("recovers after an unclosed tag instead of cascading", () => {
    const text = VALID_TEXT.replace("</Caption>", "");
    const report = validateStrict(text);
    expect(report.ok).toBe(false);
    expect(report.errors.length).toBeLessThan(8);
  });
});

describe("normalizeVerdict", () => {
  it("accepts bare verdicts case-insensitively", () => {
    expect(normalizeVerdict("Yes")).toBe("Yes");
    expect(normalizeVerdict("NO")).toBe("No");
    expect(normalizeVerdict("  yes  ")).toBe("Yes");
  });

  it("trims trailing terminal punctuation runs", () => {
    expect(normalizeVerdict("Yes.")).toBe("Yes");
    expect(normalizeVerdict("no!! ;")).toBe("No");
    expect(normalizeVerdict(" Yes.　")).toBe("Yes");
  });

  it("rejects anything beyond a verdict", () => {
    expect(normalizeVerdict("Yes, clearly")).toBeNull();
    expect(normalizeVerdict("maybe")).toBeNull();
    expect(normalizeVerdict(".Yes")).toBeNull();
    expect(normalizeVerdict("")).toBeNull();
  });
});

describe("extractConclusion", () => {
  it("returns the first conclusion span", () => {
    const text = "<Conclusion>Yes.</Conclusion> <Conclusion>No</Conclusion>";
    expect(extractConclusion(text)).toBe("Yes");
  });

  it("is exact about tag case", () => {
    expect(extractConclusion("<conclusion>Yes</conclusion>")).toBeNull();
  });

  it("returns null when the span is not a verdict", () => {
    expect(extractConclusion("<Conclusion>perhaps</Conclusion>")).toBeNull();
  });
});

describe("assembleSections", () => {
  it("produces strict-valid text from non-blank fields", () => {
    expect(validateStrict(assembleSections(FILLED)).ok).toBe(true);
  });
});
