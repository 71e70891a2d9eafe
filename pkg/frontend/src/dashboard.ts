// Report dashboard: upload form plus a live table of every report,
// newest first. The table re-polls the listing every few seconds and
// rewrites itself in place; no reloads, no push channel.

import { api, ApiError, ReportSummary } from "./api.js";
import { el } from "./dom.js";

export const DASHBOARD_POLL_MS = 3000;

const LANGUAGES = ["en", "pt", "es", "fr", "it", "de"];

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return String(err);
}

function processedCell(report: ReportSummary): HTMLElement {
  if (report.processed) {
    return el("span", { class: "mark done", title: "Done" }, "✓");
  }
  // Pending mark plus the live status, so progress is visible per row.
  return el("span", { class: "mark pending", title: report.status },
            `⋯ ${report.status}`);
}

export function renderDashboard(root: HTMLElement,
                                pollMs: number = DASHBOARD_POLL_MS): () => void {
  const banner = el("div", { class: "banner", hidden: "" });
  const form = el("form", { class: "upload" });
  const text = el("textarea", {
    name: "text", rows: "4", placeholder: "Paste a radiology report…",
  });
  const language = el("select", { name: "language" },
                      ...LANGUAGES.map(code => el("option", { value: code }, code)));
  const category = el("input", {
    name: "category", type: "text", placeholder: "Category (MRI, Ultrasound…)",
  });
  const submit = el("button", { type: "submit" }, "Upload");
  form.append(
    text,
    el("div", { class: "upload-controls" },
       el("label", {}, "Language ", language), category, submit),
  );
  const tableWrap = el("div", { class: "reports" });
  root.replaceChildren(el("section", { class: "dashboard" },
                          el("h2", {}, "Reports"), form, banner, tableWrap));

  let disposed = false;
  let inFlight = false;

  function showError(err: unknown): void {
    banner.textContent = describe(err);
    banner.removeAttribute("hidden");
  }

  function drawTable(reports: ReportSummary[]): void {
    if (reports.length === 0) {
      tableWrap.replaceChildren(el(
        "p", { class: "empty" },
        "No reports yet. Paste one above and hit Upload."));
      return;
    }
    const head = el("tr", {},
                    ...["Code", "Category", "Original Language", "Date",
                        "Processed", "Report"].map(h => el("th", {}, h)));
    const body = reports.map(r => el(
      "tr", { "data-code": String(r.code) },
      el("td", {}, String(r.code)),
      el("td", {}, r.category),
      el("td", {}, r.original_language),
      el("td", {}, r.date),
      el("td", {}, processedCell(r)),
      el("td", {}, el("a", { href: `#/reports/${r.code}` }, "open")),
    ));
    tableWrap.replaceChildren(el("table", {}, el("thead", {}, head),
                                 el("tbody", {}, ...body)));
  }

  async function refresh(): Promise<void> {
    if (inFlight) return; // one poll at a time; a slow one skips a beat
    inFlight = true;
    try {
      const reports = await api.listReports();
      if (disposed) return;
      banner.setAttribute("hidden", "");
      drawTable(reports);
    } catch (err) {
      if (!disposed) showError(err); // keep polling; the next pass may recover
    } finally {
      inFlight = false;
    }
  }

  form.addEventListener("submit", async event => {
    event.preventDefault();
    if (!text.value.trim()) {
      showError(new Error("report text is empty"));
      return;
    }
    submit.disabled = true;
    try {
      await api.uploadReport({
        text: text.value,
        language: language.value,
        category: category.value.trim() || undefined,
      });
      text.value = "";
      banner.setAttribute("hidden", "");
      await refresh();
    } catch (err) {
      showError(err);
    } finally {
      submit.disabled = false;
    }
  });

  const timer = window.setInterval(refresh, pollMs);
  void refresh();

  return () => {
    disposed = true;
    window.clearInterval(timer);
  };
}
