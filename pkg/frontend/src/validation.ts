/**
 * Client-side mirror of the server's Strict annotation grammar.
 *
 * Used only for immediate feedback while editing; the server re-validates on
 * submit and stays authoritative. JS and the server disagree on whether a few
 * exotic control characters count as whitespace (e.g. U+0085), so a verdict
 * here is advisory, never a substitute for the /validate endpoint.
 */

import type { SectionsPayload, ValidationIssue, ValidationReport, VerdictText } from "./types.js";

export const SECTION_NAMES = [
  "Caption",
  "Facial Description",
  "Facial Attributes",
  "Reasoning",
  "Spoofing Description",
  "Conclusion",
] as const;

export type SectionName = (typeof SECTION_NAMES)[number];

export const SECTION_FIELDS: Record<SectionName, keyof SectionsPayload> = {
  Caption: "caption",
  "Facial Description": "facial_description",
  "Facial Attributes": "facial_attributes",
  Reasoning: "reasoning",
  "Spoofing Description": "spoofing_description",
  Conclusion: "conclusion",
};

const OPEN_TOKENS = new Map<string, SectionName>(SECTION_NAMES.map((n) => [`<${n}>`, n]));
const CLOSE_TOKENS = new Map<string, SectionName>(SECTION_NAMES.map((n) => [`</${n}>`, n]));
const FOLDED_NAMES = new Map<string, SectionName>(
  SECTION_NAMES.map((n) => [n.replace(/\s+/gu, "").toLowerCase(), n]),
);

const ANGLED_RE = /<\/?[^<>]*>/gu;
const TERMINAL_TRIM_RE = /[\s.!;]+$/u;

export function openTag(name: SectionName): string {
  return `<${name}>`;
}

export function closeTag(name: SectionName): string {
  return `</${name}>`;
}

/** Trim, drop terminal punctuation runs, case-fold; exact yes/no only. */
export function normalizeVerdict(text: string): VerdictText | null {
  const t = text.trim().replace(TERMINAL_TRIM_RE, "").toLowerCase();
  if (t === "yes") return "Yes";
  if (t === "no") return "No";
  return null;
}

/** Verdict from the first <Conclusion>...</Conclusion> span, else null. */
export function extractConclusion(text: string): VerdictText | null {
  const open = openTag("Conclusion");
  const close = closeTag("Conclusion");
  const start = text.indexOf(open);
  if (start < 0) return null;
  const inner = start + open.length;
  const end = text.indexOf(close, inner);
  if (end < 0) return null;
  return normalizeVerdict(text.slice(inner, end));
}

/** First <name>...</name> span body, for pre-filling editors from raw output. */
export function extractSectionSpan(text: string, name: SectionName): string | null {
  const open = openTag(name);
  const close = closeTag(name);
  const start = text.indexOf(open);
  if (start < 0) return null;
  const inner = start + open.length;
  const end = text.indexOf(close, inner);
  if (end < 0) return null;
  return text.slice(inner, end);
}

type TokenRole = "open" | "close" | "near_miss" | "prose";

function classify(token: string): [TokenRole, SectionName | null] {
  const open = OPEN_TOKENS.get(token);
  if (open) return ["open", open];
  const close = CLOSE_TOKENS.get(token);
  if (close) return ["close", close];
  let inner = token.slice(1, -1);
  if (inner.startsWith("/")) inner = inner.slice(1);
  const folded = inner.replace(/\s+/gu, "").toLowerCase();
  const near = FOLDED_NAMES.get(folded);
  if (near) return ["near_miss", near];
  return ["prose", null];
}

interface RawSection {
  name: SectionName;
  text: string;
}

function issue(code: string, message: string, section?: SectionName, position?: number): ValidationIssue {
  const out: ValidationIssue = { code, message };
  if (section !== undefined) out.section = section;
  if (position !== undefined) out.position = position;
  return out;
}

function analyze(text: string, strict: boolean): { sections: RawSection[]; errors: ValidationIssue[] } {
  const errors: ValidationIssue[] = [];
  const sections: RawSection[] = [];
  const consumed: [number, number][] = [];

  let openName: SectionName | null = null;
  let openPos = 0;
  let textStart = 0;

  const abandon = (upto: number) => {
    consumed.push([openPos, upto]);
    openName = null;
  };

  for (const m of text.matchAll(ANGLED_RE)) {
    const token = m[0];
    const at = m.index ?? 0;
    const [role, name] = classify(token);
    if (role === "prose") continue;
    if (role === "near_miss") {
      if (openName === null) {
        errors.push(issue("MalformedTag", `malformed tag ${JSON.stringify(token)} at offset ${at}`, undefined, at));
        consumed.push([at, at + token.length]);
      }
      continue;
    }
    if (role === "open") {
      if (openName !== null) {
        errors.push(issue("MalformedTag", `tag ${token} opened inside <${openName}> at offset ${at}`, undefined, at));
        abandon(at);
      }
      openName = name;
      openPos = at;
      textStart = at + token.length;
    } else {
      if (openName === null) {
        errors.push(issue("MalformedTag", `closing tag ${token} without matching open at offset ${at}`, undefined, at));
        consumed.push([at, at + token.length]);
      } else if (name !== openName) {
        errors.push(issue("MalformedTag", `closing tag ${token} inside <${openName}> at offset ${at}`, undefined, at));
        abandon(at + token.length);
      } else {
        sections.push({ name: name!, text: text.slice(textStart, at) });
        consumed.push([openPos, at + token.length]);
        openName = null;
      }
    }
  }

  if (openName !== null) {
    errors.push(issue("MalformedTag", `<${openName}> never closed at offset ${openPos}`, undefined, openPos));
    abandon(text.length);
  }

  if (strict) {
    const spans = [...consumed].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
    spans.push([text.length, text.length]);
    let cursor = 0;
    for (const [start, end] of spans) {
      const gap = text.slice(cursor, start);
      if (gap.trim()) {
        const offset = cursor + (gap.length - gap.trimStart().length);
        errors.push(issue("MalformedTag", `text outside sections at offset ${offset}`, undefined, offset));
      }
      cursor = Math.max(cursor, end);
    }
    let seenMax = -1;
    for (const raw of sections) {
      const idx = SECTION_NAMES.indexOf(raw.name);
      if (idx < seenMax) {
        errors.push(issue("OutOfOrder", `section <${raw.name}> out of canonical order`, raw.name));
      }
      seenMax = Math.max(seenMax, idx);
    }
  }

  for (const raw of sections) {
    if (!raw.text.trim()) {
      errors.push(issue("EmptySection", `section <${raw.name}> is empty`, raw.name));
    }
  }

  for (const name of SECTION_NAMES) {
    const n = sections.filter((s) => s.name === name).length;
    if (n === 0) {
      errors.push(issue("MissingSection", `missing section <${name}>`, name));
    } else if (n > 1) {
      errors.push(issue("DuplicateSection", `section <${name}> appears ${n} times`, name));
    }
  }

  const conclusions = sections.filter((s) => s.name === "Conclusion");
  if (conclusions.length === 1) {
    const body = conclusions[0]!.text;
    if (body.trim() && normalizeVerdict(body) === null) {
      errors.push(
        issue("InvalidConclusion", `conclusion ${JSON.stringify(body.trim())} does not normalize to Yes or No`, "Conclusion"),
      );
    }
  }

  return { sections, errors };
}

export function validateStrict(text: string): ValidationReport {
  const { errors } = analyze(text, true);
  return { ok: errors.length === 0, errors };
}

export function validateLenient(text: string): ValidationReport {
  const { errors } = analyze(text, false);
  return { ok: errors.length === 0, errors };
}

/** Canonical text form: six tag pairs joined by single spaces. */
export function assembleSections(sections: SectionsPayload): string {
  return SECTION_NAMES.map((n) => `${openTag(n)}${sections[SECTION_FIELDS[n]]}${closeTag(n)}`).join(" ");
}

/** Issues attributable to one section, for inline display next to its editor. */
export function issuesForSection(report: ValidationReport, name: SectionName): ValidationIssue[] {
  return report.errors.filter((e) => e.section === name);
}

export function emptySections(): SectionsPayload {
  return {
    caption: "",
    facial_description: "",
    facial_attributes: "",
    reasoning: "",
    spoofing_description: "",
    conclusion: "",
  };
}
