// Fetch stubbing and fixtures shared by the view tests.

import { vi } from "vitest";

import { ReportDetail, ReportSummary, Term } from "../src/api.js";

export interface StubResponse {
  status: number;
  body: unknown;
}

export type Routes = Record<string, (init?: RequestInit) => StubResponse>;

export function ok(body: unknown): StubResponse {
  return { status: 200, body };
}

/** Install a fetch stub keyed by "METHOD /path". Routes can be reassigned
 * between polls to simulate server-side progress. */
export function stubFetch(routes: Routes) {
  const calls: { key: string; init?: RequestInit }[] = [];
  const fn = vi.fn(async (input: unknown, init?: RequestInit) => {
    const url = typeof input === "string" ? input : String(input);
    const key = `${init?.method ?? "GET"} ${url}`;
    calls.push({ key, init });
    const handler = routes[key];
    const { status, body } = handler
      ? handler(init)
      : { status: 404, body: { code: "not_found", message: `no stub for ${key}` } };
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    };
  });
  vi.stubGlobal("fetch", fn);
  return { calls, fn };
}

export async function until(cond: () => boolean, timeoutMs = 2000): Promise<void> {
  const started = Date.now();
  while (!cond()) {
    if (Date.now() - started > timeoutMs) {
      throw new Error("condition not met in time");
    }
    await new Promise(resolve => setTimeout(resolve, 5));
  }
}

export function summary(over: Partial<ReportSummary> = {}): ReportSummary {
  return {
    code: 1,
    category: "Radiograph",
    original_language: "en",
    created_at: "2019-05-14T13:48:02+00:00",
    date: "2019-05-14 13:48",
    status: "Done",
    processed: true,
    ...over,
  };
}

export function detail(over: Partial<ReportDetail> = {}): ReportDetail {
  return {
    ...summary(),
    original_text: "Chest X-ray shows pleural effusion.",
    translated_text: null,
    failure_reason: null,
    offset_unit: "scalar",
    annotations: [
      { term_id: "RID11", start: 0, end: 11,
        matched_text: "Chest X-ray", surface_form: "chest x-ray", source: "local" },
      { term_id: "RID111", start: 18, end: 34,
        matched_text: "pleural effusion", surface_form: "pleural effusion",
        source: "local" },
    ],
    ...over,
  };
}

export function term(over: Partial<Term> = {}): Term {
  return {
    id: "RID111",
    preferred_label: "pleural effusion",
    synonyms: ["pleural fluid"],
    parent_id: "RID110",
    ...over,
  };
}
