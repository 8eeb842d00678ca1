/** Wire types for the review service API. Field names match the JSON. */

export type VerdictText = "Yes" | "No";

export interface ValidationIssue {
  code: string;
  message: string;
  section?: string;
  position?: number;
}

export interface ValidationReport {
  ok: boolean;
  errors: ValidationIssue[];
}

/** One object with the six named section bodies. */
export interface SectionsPayload {
  caption: string;
  facial_description: string;
  facial_attributes: string;
  reasoning: string;
  spoofing_description: string;
  conclusion: string;
}

export interface AttemptView {
  sample_id: string;
  round: number;
  raw_output: string;
  verdict: VerdictText | null;
  status: "Accepted" | "RetryScheduled" | "HardCase" | "ClientError";
  error: string | null;
  transient_retries: number;
  /** Strict validation of raw_output, attached by the case-detail endpoint. */
  validation?: ValidationReport;
}

export interface CaseSummary {
  sample_id: string;
  subtype: string;
  label: VerdictText;
  resolved: boolean;
  flagged_at: number;
  attempt_count: number;
}

export interface CaseDetail {
  sample_id: string;
  label: VerdictText;
  subtype: string;
  attempts: AttemptView[];
  correction: SectionsPayload | null;
  resolved: boolean;
  flagged_at: number;
}

export interface QueuePage {
  items: CaseSummary[];
  next_cursor: string | null;
}

export interface CaseResponse {
  case: CaseDetail;
  revision: number;
}

export interface StatsPayload {
  counts: Record<string, number>;
  total: number;
  queue: { pending: number; resolved: number };
  revision: number;
}

export interface HealthPayload {
  version: string;
  revision: number;
}

export interface ScoreItem {
  id?: string | null;
  raw_output: string;
  truth: VerdictText;
}

export interface ScoreReport {
  items: { id: string | null; accuracy: 0 | 1; format: 0 | 1 }[];
  report: { matched: number; mismatched: number; accuracy: number };
}

export interface ApiErrorBody {
  error: { code: string; message: string; details: unknown };
}

export interface QueueFilters {
  status?: "pending" | "resolved";
  subtype?: string;
}
