/** Editing session for one hard case.
 *
 * Holds the six section drafts, gates submit on the local Strict mirror, and
 * runs the optimistic-concurrency protocol: the revision received with the
 * case rides along on PUT, a stale revision comes back as Conflict (the case
 * is reloaded and the reviewer re-confirms), and a conclusion that fights the
 * ground-truth label is a blocking dialog. Concurrent submit calls are
 * deduplicated so a double-click produces one request.
 */

import { ApiError, type ReviewApiClient } from "./api.js";
import type { CaseDetail, CaseResponse, SectionsPayload, ValidationIssue, ValidationReport } from "./types.js";
import {
  SECTION_FIELDS,
  SECTION_NAMES,
  assembleSections,
  emptySections,
  extractSectionSpan,
  normalizeVerdict,
  validateStrict,
  type SectionName,
} from "./validation.js";

export type SessionState = "editing" | "resolved" | "conflict" | "mismatch";

export interface SubmitOutcome {
  status: "accepted" | "conflict" | "mismatch" | "invalid" | "error";
  revision: number;
  errors?: ValidationIssue[];
  message?: string;
}

/** Draft sections for a case: correction if present, else the spans found in
 * the newest attempt, else empty. */
export function prefillSections(detail: CaseDetail): SectionsPayload {
  if (detail.correction) return { ...detail.correction };
  const sections = emptySections();
  const latest = detail.attempts[detail.attempts.length - 1];
  if (!latest) return sections;
  for (const name of SECTION_NAMES) {
    const span = extractSectionSpan(latest.raw_output, name);
    if (span !== null) sections[SECTION_FIELDS[name]] = span;
  }
  return sections;
}

export class CorrectionSession {
  private readonly api: ReviewApiClient;
  detail: CaseDetail;
  heldRevision: number;
  sections: SectionsPayload;
  state: SessionState;
  /** Error list from a server-side ValidationFailed, shown inline. */
  serverErrors: ValidationIssue[] = [];
  private inFlight: Promise<SubmitOutcome> | null = null;

  constructor(api: ReviewApiClient, loaded: CaseResponse) {
    this.api = api;
    this.detail = loaded.case;
    this.heldRevision = loaded.revision;
    this.sections = prefillSections(loaded.case);
    this.state = loaded.case.resolved ? "resolved" : "editing";
  }

  setSection(name: SectionName, text: string): void {
    this.sections[SECTION_FIELDS[name]] = text;
    this.serverErrors = [];
  }

  assembled(): string {
    return assembleSections(this.sections);
  }

  /** Local Strict report over the assembled draft. */
  validate(): ValidationReport {
    return validateStrict(this.assembled());
  }

  /** All six sections filled and the assembled text passes the local mirror. */
  get submitEnabled(): boolean {
    if (this.state !== "editing" && this.state !== "conflict") return false;
    if (SECTION_NAMES.some((n) => !this.sections[SECTION_FIELDS[n]].trim())) return false;
    return this.validate().ok;
  }

  /** Local warning: the draft conclusion disagrees with the ground truth. */
  get conclusionMismatch(): boolean {
    const verdict = normalizeVerdict(this.sections.conclusion);
    return verdict !== null && verdict !== this.detail.label;
  }

  /** Submit once; concurrent calls share the same request. */
  submit(): Promise<SubmitOutcome> {
    if (this.inFlight) return this.inFlight;
    this.inFlight = this.doSubmit().finally(() => {
      this.inFlight = null;
    });
    return this.inFlight;
  }

  private async doSubmit(): Promise<SubmitOutcome> {
    try {
      const response = await this.api.submitSections(
        this.detail.sample_id,
        this.sections,
        this.heldRevision,
      );
      this.detail = response.case;
      this.heldRevision = response.revision;
      this.state = "resolved";
      return { status: "accepted", revision: response.revision };
    } catch (e) {
      if (!(e instanceof ApiError)) throw e;
      if (e.code === "Conflict") {
        // Someone else moved the store; reload and let the reviewer re-confirm.
        const fresh = await this.api.getCase(this.detail.sample_id);
        this.detail = fresh.case;
        this.heldRevision = fresh.revision;
        this.state = fresh.case.resolved ? "resolved" : "conflict";
        return { status: "conflict", revision: fresh.revision, message: e.message };
      }
      if (e.code === "ConclusionMismatch") {
        this.state = "mismatch";
        return { status: "mismatch", revision: this.heldRevision, message: e.message };
      }
      if (e.code === "ValidationFailed") {
        this.serverErrors = Array.isArray(e.details) ? (e.details as ValidationIssue[]) : [];
        return {
          status: "invalid",
          revision: this.heldRevision,
          errors: this.serverErrors,
          message: e.message,
        };
      }
      return { status: "error", revision: this.heldRevision, message: e.message };
    }
  }

  /** Leave the blocking mismatch dialog and keep editing. */
  dismissMismatch(): void {
    if (this.state === "mismatch") this.state = "editing";
  }
}
