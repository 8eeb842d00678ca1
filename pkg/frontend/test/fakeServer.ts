/** In-process stand-in for the review service, implementing the documented
 * endpoint semantics (cursor pagination, revision protocol, error envelope)
 * behind a fetch-compatible function. Used to exercise the client against
 * races and failure paths without a network.
 */

import { Buffer } from "node:buffer";

import type { FetchLike } from "../src/api.js";
import type { AttemptView, CaseDetail, SectionsPayload } from "../src/types.js";
import {
  SECTION_FIELDS,
  SECTION_NAMES,
  assembleSections,
  normalizeVerdict,
  validateStrict,
} from "../src/validation.js";

export interface LoggedRequest {
  method: string;
  url: string;
  body: unknown;
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function errorResponse(status: number, code: string, message: string, details: unknown = null): Response {
  return json(status, { error: { code, message, details } });
}

function encodeCursor(flaggedAt: number, sampleId: string): string {
  return Buffer.from(JSON.stringify([flaggedAt, sampleId])).toString("base64url");
}

function decodeCursor(cursor: string): [number, string] | null {
  try {
    const [flaggedAt, sampleId] = JSON.parse(Buffer.from(cursor, "base64url").toString("utf8"));
    return [Number(flaggedAt), String(sampleId)];
  } catch {
    return null;
  }
}

function keyLessOrEqual(a: [number, string], b: [number, string]): boolean {
  return a[0] < b[0] || (a[0] === b[0] && a[1] <= b[1]);
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class FakeReviewServer {
  private readonly cases = new Map<string, CaseDetail>();
  private order: [number, string][] = [];
  revision = 0;
  readonly log: LoggedRequest[] = [];
  /** Artificial latency before PUT handling, to widen race windows. */
  putDelayMs = 0;
  putCount = 0;

  flag(detail: CaseDetail): void {
    if (this.cases.has(detail.sample_id)) return;
    this.cases.set(detail.sample_id, detail);
    this.order.push([detail.flagged_at, detail.sample_id]);
    this.order.sort((a, b) => a[0] - b[0] || (a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
    this.revision += 1;
  }

  get fetch(): FetchLike {
    return (url, init) => this.handle(url, init);
  }

  private async handle(url: string, init?: RequestInit): Promise<Response> {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.log.push({ method, url, body });
    const u = new URL(url);
    const parts = u.pathname.split("/").filter(Boolean);

    if (method === "GET" && u.pathname === "/healthz") {
      return json(200, { version: "fake", revision: this.revision });
    }
    if (method === "GET" && u.pathname === "/hardcases") {
      return this.listCases(u);
    }
    if (method === "GET" && parts[0] === "hardcases" && parts.length === 2) {
      return this.getCase(decodeURIComponent(parts[1]!));
    }
    if (method === "PUT" && parts[0] === "hardcases" && parts.length === 2) {
      if (this.putDelayMs) await sleep(this.putDelayMs);
      this.putCount += 1;
      return this.putCorrection(decodeURIComponent(parts[1]!), body);
    }
    if (method === "POST" && u.pathname === "/validate") {
      return json(200, validateStrict(String(body?.text ?? "")));
    }
    return errorResponse(404, "NotFound", `no route ${method} ${u.pathname}`);
  }

  private listCases(u: URL): Response {
    const status = u.searchParams.get("status");
    const subtype = u.searchParams.get("subtype");
    const cursor = u.searchParams.get("cursor");
    const limit = u.searchParams.has("limit") ? Number(u.searchParams.get("limit")) : 50;
    if (status && status !== "pending" && status !== "resolved") {
      return errorResponse(400, "BadRequest", `bad status filter ${status}`);
    }
    if (!(limit >= 1 && limit <= 500)) {
      return errorResponse(400, "BadRequest", `limit ${limit} outside [1, 500]`);
    }
    let after: [number, string] | null = null;
    if (cursor) {
      after = decodeCursor(cursor);
      if (!after) return errorResponse(400, "BadRequest", `malformed cursor ${cursor}`);
    }

    const out: CaseDetail[] = [];
    for (const key of this.order) {
      if (after && keyLessOrEqual(key, after)) continue;
      const item = this.cases.get(key[1])!;
      if (status === "pending" && item.resolved) continue;
      if (status === "resolved" && !item.resolved) continue;
      if (subtype && item.subtype !== subtype) continue;
      out.push(item);
      if (out.length === limit) break;
    }
    let nextCursor: string | null = null;
    if (out.length === limit) {
      const last = out[out.length - 1]!;
      const lastKey: [number, string] = [last.flagged_at, last.sample_id];
      const globalLast = this.order[this.order.length - 1];
      if (!globalLast || lastKey[0] !== globalLast[0] || lastKey[1] !== globalLast[1]) {
        nextCursor = encodeCursor(...lastKey);
      }
    }
    return json(200, {
      items: out.map((c) => ({
        sample_id: c.sample_id,
        subtype: c.subtype,
        label: c.label,
        resolved: c.resolved,
        flagged_at: c.flagged_at,
        attempt_count: c.attempts.length,
      })),
      next_cursor: nextCursor,
    });
  }

  private getCase(sampleId: string): Response {
    const item = this.cases.get(sampleId);
    if (!item) return errorResponse(404, "NotFound", `no hard case ${sampleId}`);
    const attempts: AttemptView[] = item.attempts.map((a) => ({
      ...a,
      validation: validateStrict(a.raw_output),
    }));
    return json(200, { case: { ...item, attempts }, revision: this.revision });
  }

  private putCorrection(sampleId: string, body: any): Response {
    const hasText = body?.text !== undefined && body?.text !== null;
    const hasSections = body?.sections !== undefined && body?.sections !== null;
    if (hasText === hasSections) {
      return errorResponse(400, "BadRequest", "provide exactly one of text or sections");
    }
    const item = this.cases.get(sampleId);
    if (!item) return errorResponse(404, "NotFound", `no hard case ${sampleId}`);
    if (body.expected_revision !== this.revision) {
      return errorResponse(
        409,
        "Conflict",
        `expected revision ${body.expected_revision}, store is at ${this.revision}`,
        { revision: this.revision },
      );
    }
    if (item.resolved) {
      return errorResponse(409, "Conflict", `case ${sampleId} already resolved`);
    }

    let text: string;
    let sections: SectionsPayload;
    if (hasSections) {
      sections = body.sections as SectionsPayload;
      for (const name of SECTION_NAMES) {
        const value = sections[SECTION_FIELDS[name]];
        if (typeof value !== "string" || !value.trim()) {
          return errorResponse(422, "ValidationFailed", `section <${name}> is empty or missing`);
        }
      }
      text = assembleSections(sections);
    } else {
      text = String(body.text);
      sections = null as unknown as SectionsPayload;
    }
    const report = validateStrict(text);
    if (!report.ok) {
      return errorResponse(422, "ValidationFailed", "correction rejected: FormatInvalid", report.errors);
    }
    if (!sections) {
      sections = {} as SectionsPayload;
      for (const name of SECTION_NAMES) {
        const open = `<${name}>`;
        const start = text.indexOf(open) + open.length;
        sections[SECTION_FIELDS[name]] = text.slice(start, text.indexOf(`</${name}>`, start));
      }
    }
    const verdict = normalizeVerdict(sections.conclusion);
    if (verdict !== item.label) {
      return errorResponse(422, "ConclusionMismatch", "correction rejected: ConclusionMismatch", [
        { expected: item.label, got: verdict },
      ]);
    }

    const resolved: CaseDetail = { ...item, correction: sections, resolved: true };
    this.cases.set(sampleId, resolved);
    this.revision += 1;
    return json(200, { case: resolved, revision: this.revision });
  }
}

/** Minimal pending case fixture. */
export function makeCase(i: number, opts: { label?: "Yes" | "No"; subtype?: string } = {}): CaseDetail {
  const label = opts.label ?? "Yes";
  const wrongConclusion = label === "Yes" ? "No" : "Yes";
  const raw = assembleSections({
    caption: `case ${i} under review`,
    facial_description: "A single frontal face is visible.",
    facial_attributes: '"eyes": open, "mouth": closed.',
    reasoning: "Texture cues considered in turn.",
    spoofing_description: "Presentation-attack cues assessed.",
    conclusion: wrongConclusion,
  });
  const attempt = (round: number): AttemptView => ({
    sample_id: `h${String(i).padStart(4, "0")}`,
    round,
    raw_output: raw,
    verdict: wrongConclusion,
    status: round === 1 ? "RetryScheduled" : "HardCase",
    error: null,
    transient_retries: 0,
  });
  return {
    sample_id: `h${String(i).padStart(4, "0")}`,
    label,
    subtype: opts.subtype ?? "Mask3D",
    attempts: [attempt(1), attempt(2)],
    correction: null,
    resolved: false,
    flagged_at: i,
  };
}
