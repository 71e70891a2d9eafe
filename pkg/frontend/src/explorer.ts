// Annotation explorer for a single report: the annotated English text with
// recognized terms highlighted inline, a side panel with lexicon details
// for whichever highlight was clicked, and the original text alongside for
// reports that were translated. Non-terminal reports show their live
// status instead and keep polling until the pipeline settles.

import { api, ApiError, isTerminal, ReportDetail } from "./api.js";
import { el } from "./dom.js";
import { computeHighlightSegments, InvariantViolation } from "./highlight.js";

export const EXPLORER_POLL_MS = 3000;

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return String(err);
}

function meta(report: ReportDetail): HTMLElement {
  const pairs: [string, string][] = [
    ["Category", report.category],
    ["Original language", report.original_language],
    ["Date", report.date],
    ["Status", report.status],
  ];
  return el("dl", { class: "meta" },
            ...pairs.flatMap(([k, v]) => [el("dt", {}, k), el("dd", {}, v)]));
}

export function renderExplorer(root: HTMLElement, code: number,
                               pollMs: number = EXPLORER_POLL_MS): () => void {
  const body = el("div", { class: "report-body" });
  root.replaceChildren(el(
    "section", { class: "explorer" },
    el("p", {}, el("a", { href: "#/" }, "← all reports")),
    el("h2", {}, `Report ${code}`),
    body,
  ));

  let disposed = false;
  let timer: number | null = null;

  function schedule(): void {
    if (!disposed) timer = window.setTimeout(load, pollMs);
  }

  async function showTerm(panel: HTMLElement, termId: string): Promise<void> {
    panel.replaceChildren(el("p", {}, `Loading ${termId}…`));
    try {
      const term = await api.getTerm(termId);
      if (disposed) return;
      const rows: Node[] = [
        el("h3", {}, term.id),
        el("p", { class: "term-label" }, term.preferred_label),
      ];
      if (term.synonyms.length > 0) {
        rows.push(el("p", { class: "term-synonyms" },
                     "Also matches: ", term.synonyms.join(", ")));
      }
      if (term.parent_id) {
        rows.push(el("p", { class: "term-parent" }, "Parent: ", term.parent_id));
      }
      panel.replaceChildren(...rows);
    } catch (err) {
      if (disposed) return;
      panel.replaceChildren(el("p", { class: "term-error" },
                               `Could not load ${termId}: ${describe(err)}`));
    }
  }

  function drawDone(report: ReportDetail): void {
    const annotated = report.original_language === "en"
      ? report.original_text
      : report.translated_text ?? "";

    const panel = el("aside", { class: "term-panel" },
                     el("p", { class: "hint" }, "Click a highlighted term."));

    let textBlock: HTMLElement;
    try {
      const segments = computeHighlightSegments(annotated, report.annotations);
      textBlock = el("p", { class: "annotated-text" });
      for (const segment of segments) {
        if (segment.termId === null) {
          textBlock.append(segment.text);
        } else {
          const mark = el("mark", { class: "hl", "data-term-id": segment.termId },
                          segment.text);
          mark.addEventListener("click", () => {
            void showTerm(panel, segment.termId as string);
          });
          textBlock.append(mark);
        }
      }
    } catch (err) {
      if (!(err instanceof InvariantViolation)) throw err;
      // Bad offsets would highlight the wrong words; show none instead.
      textBlock = el("div", {},
                     el("div", { class: "banner" },
                        `Cannot render highlights: ${err.message}`),
                     el("p", { class: "annotated-text" }, annotated));
    }

    const blocks: Node[] = [
      meta(report),
      el("h3", {}, `Annotated text (${report.annotations.length} annotations)`),
      textBlock,
    ];
    if (report.original_language !== "en") {
      blocks.push(el("h3", {}, `Original (${report.original_language})`),
                  el("p", { class: "original-text" }, report.original_text));
    }
    body.replaceChildren(el("div", { class: "explorer-grid" },
                            el("div", { class: "report-main" }, ...blocks),
                            panel));
  }

  function drawFailed(report: ReportDetail): void {
    const button = el("button", { class: "reprocess" }, "Reprocess");
    button.addEventListener("click", async () => {
      button.disabled = true;
      try {
        await api.reprocess(code);
        await load(); // back to Received; keep watching it live
      } catch (err) {
        if (!disposed) {
          body.append(el("div", { class: "banner" }, describe(err)));
        }
      }
    });
    body.replaceChildren(
      meta(report),
      el("div", { class: "banner failure" },
         `Processing failed: ${report.failure_reason ?? "unknown reason"}`),
      button,
    );
  }

  function drawPending(report: ReportDetail): void {
    body.replaceChildren(
      meta(report),
      el("p", { class: "pending-note" },
         `Still working: ${report.status}. This page updates on its own.`));
    schedule();
  }

  async function load(): Promise<void> {
    if (timer !== null) {
      window.clearTimeout(timer);
      timer = null;
    }
    let report: ReportDetail;
    try {
      report = await api.getReport(code);
    } catch (err) {
      if (disposed) return;
      body.replaceChildren(el("div", { class: "banner" }, describe(err)));
      if (!(err instanceof ApiError && err.status === 404)) schedule();
      return;
    }
    if (disposed) return;
    if (report.status === "Done") drawDone(report);
    else if (report.status === "Failed") drawFailed(report);
    else drawPending(report);
    if (isTerminal(report.status) && timer !== null) {
      window.clearTimeout(timer);
      timer = null;
    }
  }

  void load();

  return () => {
    disposed = true;
    if (timer !== null) window.clearTimeout(timer);
  };
}
