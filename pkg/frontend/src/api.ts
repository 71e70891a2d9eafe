// Typed wrappers around the report service's HTTP endpoints.
// Everything is displayed verbatim from these payloads; the only offset
// arithmetic in the frontend lives in highlight.ts.

export interface Annotation {
  term_id: string;
  start: number;
  end: number;
  matched_text: string;
  surface_form: string;
  source: string;
}

export interface ReportSummary {
  code: number;
  category: string;
  original_language: string;
  created_at: string;
  date: string;
  status: string;
  processed: boolean;
}

export interface ReportDetail extends ReportSummary {
  original_text: string;
  translated_text: string | null;
  failure_reason: string | null;
  offset_unit: string;
  annotations: Annotation[];
}

export interface Term {
  id: string;
  preferred_label: string;
  synonyms: string[];
  parent_id: string | null;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export const TERMINAL_STATUSES = ["Done", "Failed"];

export function isTerminal(status: string): boolean {
  return TERMINAL_STATUSES.includes(status);
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let resp: { ok: boolean; status: number; json(): Promise<unknown> };
  try {
    resp = await fetch(path, init);
  } catch {
    throw new ApiError(0, "unreachable", "cannot reach the server");
  }
  if (!resp.ok) {
    // Errors come back as {"code": ..., "message": ...}; fall back to the
    // HTTP status when the body is not ours (proxy pages and the like).
    let code = "error";
    let message = `request failed with status ${resp.status}`;
    try {
      const body = (await resp.json()) as { code?: unknown; message?: unknown };
      if (typeof body.code === "string") code = body.code;
      if (typeof body.message === "string") message = body.message;
    } catch {
      // keep the fallback
    }
    throw new ApiError(resp.status, code, message);
  }
  return (await resp.json()) as T;
}

export interface Upload {
  text: string;
  language: string;
  category?: string;
}

export const api = {
  listReports(): Promise<ReportSummary[]> {
    return request("/reports");
  },

  getReport(code: number): Promise<ReportDetail> {
    return request(`/reports/${code}`);
  },

  getTerm(termId: string): Promise<Term> {
    return request(`/terms/${encodeURIComponent(termId)}`);
  },

  uploadReport(upload: Upload): Promise<{ code: number }> {
    return request("/reports", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(upload),
    });
  },

  reprocess(code: number): Promise<{ code: number; status: string }> {
    return request(`/reports/${code}/reprocess`, { method: "POST" });
  },
};
