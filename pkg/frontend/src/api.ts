/** Typed client for the review service. All state lives server-side. */

import type {
  ApiErrorBody,
  CaseResponse,
  HealthPayload,
  QueueFilters,
  QueuePage,
  ScoreItem,
  ScoreReport,
  SectionsPayload,
  StatsPayload,
  ValidationReport,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: unknown;

  constructor(code: string, message: string, status: number, details: unknown = null) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
    this.details = details;
  }

  /** Transport-level failures surface as the offline banner, not a toast. */
  get offline(): boolean {
    return this.status === 0;
  }
}

export interface ClientOptions {
  fetchFn?: FetchLike;
  token?: string;
}

interface RequestOptions {
  query?: Record<string, string | number | undefined>;
  body?: unknown;
}

export class ReviewApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private readonly token?: string;

  constructor(baseUrl: string, options: ClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
    this.token = options.token;
  }

  private async request<T>(method: string, path: string, options: RequestOptions = {}): Promise<T> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(options.query ?? {})) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.size ? `?${params.toString()}` : "";
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const init: RequestInit = { method, headers };
    if (options.body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(options.body);
    }

    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}${qs}`, init);
    } catch (e) {
      throw new ApiError("NetworkError", e instanceof Error ? e.message : String(e), 0);
    }
    if (!response.ok) {
      let body: ApiErrorBody | null = null;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        /* non-envelope error body */
      }
      if (body?.error) {
        throw new ApiError(body.error.code, body.error.message, response.status, body.error.details);
      }
      throw new ApiError("HttpError", `HTTP ${response.status}`, response.status);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthPayload> {
    return this.request("GET", "/healthz");
  }

  listCases(filters: QueueFilters = {}, cursor?: string, limit?: number): Promise<QueuePage> {
    return this.request("GET", "/hardcases", {
      query: { status: filters.status, subtype: filters.subtype, cursor, limit },
    });
  }

  getCase(sampleId: string): Promise<CaseResponse> {
    return this.request("GET", `/hardcases/${encodeURIComponent(sampleId)}`);
  }

  submitText(sampleId: string, text: string, expectedRevision: number): Promise<CaseResponse> {
    return this.request("PUT", `/hardcases/${encodeURIComponent(sampleId)}`, {
      body: { text, expected_revision: expectedRevision },
    });
  }

  submitSections(sampleId: string, sections: SectionsPayload, expectedRevision: number): Promise<CaseResponse> {
    return this.request("PUT", `/hardcases/${encodeURIComponent(sampleId)}`, {
      body: { sections, expected_revision: expectedRevision },
    });
  }

  validateRemote(text: string, strictness: "strict" | "lenient" = "strict"): Promise<ValidationReport> {
    return this.request("POST", "/validate", { body: { text, strictness } });
  }

  score(items: ScoreItem[]): Promise<ScoreReport> {
    return this.request("POST", "/score", { body: { items } });
  }

  stats(): Promise<StatsPayload> {
    return this.request("GET", "/stats");
  }
}
