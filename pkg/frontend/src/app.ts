/** DOM wiring for the review UI.
 *
 * Reviewers see both the image reference and the full attempt history; which
 * of the two the original experts worked from is an open call, so we show
 * everything and let the reviewer ignore what they don't need.
 */

import { ApiError, ReviewApiClient } from "./api.js";
import { QueuePager } from "./queue.js";
import { CorrectionSession } from "./session.js";
import type { AttemptView, CaseSummary, QueueFilters } from "./types.js";
import { SECTION_FIELDS, SECTION_NAMES, issuesForSection, type SectionName } from "./validation.js";

const SUBTYPE_CHIPS = [
  "Photo", "Newspaper", "Poster", "Album", "A4", "FacialPrint", "UpperBody",
  "Phone", "Pad", "PC", "Mask3D", "RegionMask", "Garagekit", "Adultdull", "Living",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function must<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class ReviewApp {
  private readonly api: ReviewApiClient;
  private readonly pager: QueuePager;
  private session: CorrectionSession | null = null;
  private filters: QueueFilters = { status: "pending" };

  private readonly queueBody = must<HTMLTableSectionElement>("queue-body");
  private readonly pageLabel = must<HTMLSpanElement>("page-label");
  private readonly prevBtn = must<HTMLButtonElement>("prev-page");
  private readonly nextBtn = must<HTMLButtonElement>("next-page");
  private readonly chipBar = must<HTMLDivElement>("chips");
  private readonly casePanel = must<HTMLDivElement>("case-panel");
  private readonly offlineBanner = must<HTMLDivElement>("offline");
  private readonly toasts = must<HTMLDivElement>("toasts");

  constructor(baseUrl: string) {
    this.api = new ReviewApiClient(baseUrl);
    this.pager = new QueuePager(this.api);
    this.assetBase = baseUrl.replace(/\/+$/, "");
  }

  private readonly assetBase: string;

  async start(): Promise<void> {
    this.renderChips();
    this.prevBtn.addEventListener("click", () => this.guard(() => this.pager.prev()).then(() => this.renderQueue()));
    this.nextBtn.addEventListener("click", () => this.guard(() => this.pager.next()).then(() => this.renderQueue()));
    document.addEventListener("keydown", (ev) => this.onKey(ev));
    await this.guard(() => this.pager.setFilters(this.filters));
    this.renderQueue();
  }

  private async guard<T>(fn: () => Promise<T>): Promise<T | null> {
    try {
      const out = await fn();
      this.offlineBanner.hidden = true;
      return out;
    } catch (e) {
      if (e instanceof ApiError && e.offline) {
        this.offlineBanner.hidden = false;
      } else if (e instanceof ApiError) {
        this.toast(`${e.code}: ${e.message}`);
      } else {
        this.toast(String(e));
      }
      return null;
    }
  }

  private toast(message: string): void {
    const node = el("div", "toast", message);
    this.toasts.appendChild(node);
    setTimeout(() => node.remove(), 5000);
  }

  private renderChips(): void {
    this.chipBar.replaceChildren();
    for (const status of ["pending", "resolved"] as const) {
      const chip = el("button", "chip", status);
      chip.dataset["active"] = String(this.filters.status === status);
      chip.addEventListener("click", async () => {
        this.filters.status = this.filters.status === status ? undefined : status;
        await this.guard(() => this.pager.setFilters(this.filters));
        this.renderChips();
        this.renderQueue();
      });
      this.chipBar.appendChild(chip);
    }
    for (const subtype of SUBTYPE_CHIPS) {
      const chip = el("button", "chip", subtype);
      chip.dataset["active"] = String(this.filters.subtype === subtype);
      chip.addEventListener("click", async () => {
        this.filters.subtype = this.filters.subtype === subtype ? undefined : subtype;
        await this.guard(() => this.pager.setFilters(this.filters));
        this.renderChips();
        this.renderQueue();
      });
      this.chipBar.appendChild(chip);
    }
  }

  private renderQueue(): void {
    const page = this.pager.page;
    this.queueBody.replaceChildren();
    if (!page || page.items.length === 0) {
      const row = el("tr");
      const cell = el("td", "empty", "No hard cases match the current filters.");
      cell.colSpan = 5;
      row.appendChild(cell);
      this.queueBody.appendChild(row);
    } else {
      for (const item of page.items) this.queueBody.appendChild(this.queueRow(item));
    }
    this.pageLabel.textContent = `page ${this.pager.pageIndex + 1}`;
    this.prevBtn.disabled = !this.pager.hasPrev;
    this.nextBtn.disabled = !this.pager.hasNext;
  }

  private queueRow(item: CaseSummary): HTMLTableRowElement {
    const row = el("tr");
    row.append(
      el("td", "mono", item.sample_id),
      el("td", undefined, item.subtype),
      el("td", item.label === "Yes" ? "badge attack" : "badge live", item.label),
      el("td", undefined, String(item.attempt_count)),
      el("td", item.resolved ? "state done" : "state open", item.resolved ? "resolved" : "pending"),
    );
    row.addEventListener("click", () => void this.openCase(item.sample_id));
    return row;
  }

  private async openCase(sampleId: string): Promise<void> {
    const loaded = await this.guard(() => this.api.getCase(sampleId));
    if (!loaded) return;
    this.session = new CorrectionSession(this.api, loaded);
    this.renderCase();
  }

  private renderCase(): void {
    const session = this.session;
    this.casePanel.replaceChildren();
    if (!session) {
      this.casePanel.appendChild(el("div", "empty", "Select a case from the queue."));
      return;
    }
    const detail = session.detail;

    const head = el("div", "case-head");
    head.append(
      el("h2", undefined, detail.sample_id),
      el("span", detail.label === "Yes" ? "badge attack" : "badge live", `truth: ${detail.label}`),
      el("span", "badge", detail.subtype),
      el("span", session.state === "resolved" ? "state done" : "state open", session.state),
    );
    this.casePanel.appendChild(head);
    this.casePanel.appendChild(this.sampleFigure(detail.sample_id));

    for (const attempt of detail.attempts) this.casePanel.appendChild(this.attemptPanel(attempt));

    if (session.state === "conflict") {
      this.casePanel.appendChild(
        el("div", "banner conflict",
          "The queue moved while you were editing. Review the reloaded case and submit again."),
      );
    }
    if (session.state === "mismatch") {
      const dialog = el("div", "banner mismatch");
      dialog.append(
        el("span", undefined,
          `The server rejected the correction: the conclusion must agree with the ${detail.label} label.`),
      );
      const dismiss = el("button", undefined, "Back to editing");
      dismiss.addEventListener("click", () => {
        session.dismissMismatch();
        this.renderCase();
      });
      dialog.appendChild(dismiss);
      this.casePanel.appendChild(dialog);
    }

    this.casePanel.appendChild(this.editor(session));
  }

  /** Sample image via the service's static pass-through; the store itself
   * carries only the sample id, so a missing asset degrades to a label. */
  private sampleFigure(sampleId: string): HTMLElement {
    const figure = el("figure", "sample");
    const img = el("img");
    img.src = `${this.assetBase}/assets/${encodeURIComponent(sampleId)}.jpg`;
    img.alt = `sample ${sampleId}`;
    img.addEventListener("error", () => {
      figure.replaceChildren(el("figcaption", "missing", `no image asset for ${sampleId}`));
    });
    figure.append(img, el("figcaption", undefined, sampleId));
    return figure;
  }

  private attemptPanel(attempt: AttemptView): HTMLDivElement {
    const panel = el("div", "attempt");
    const head = el("div", "attempt-head");
    head.append(
      el("span", undefined, `round ${attempt.round}`),
      el("span", "badge", attempt.status),
      el("span", "badge", attempt.verdict ? `verdict: ${attempt.verdict}` : "no verdict"),
    );
    panel.appendChild(head);
    panel.appendChild(el("pre", "raw", attempt.raw_output));
    if (attempt.error) panel.appendChild(el("div", "error", attempt.error));
    for (const issue of attempt.validation?.errors ?? []) {
      panel.appendChild(el("div", "error", `${issue.code}: ${issue.message}`));
    }
    return panel;
  }

  private editor(session: CorrectionSession): HTMLDivElement {
    const form = el("div", "editor");
    const report = session.validate();

    for (const name of SECTION_NAMES) {
      const field = el("div", "field");
      field.appendChild(el("label", undefined, name));
      const area = el("textarea");
      area.value = session.sections[SECTION_FIELDS[name]];
      area.rows = name === "Conclusion" ? 1 : 3;
      area.addEventListener("input", () => {
        session.setSection(name, area.value);
        this.refreshEditorState(session, form);
      });
      field.appendChild(area);
      const errors = el("div", "field-errors");
      errors.dataset["section"] = name;
      field.appendChild(errors);
      form.appendChild(field);
    }

    const controls = el("div", "controls");
    const warning = el("span", "warn");
    warning.id = "mismatch-warning";
    const submit = el("button", "submit", "Submit correction");
    submit.addEventListener("click", async () => {
      const outcome = await session.submit();
      if (outcome.status === "accepted") {
        this.toast(`resolved ${session.detail.sample_id}`);
        await this.guard(() => this.pager.reload());
        this.renderQueue();
        await this.advance();
        return;
      }
      this.renderCase();
    });
    controls.append(warning, submit);
    form.appendChild(controls);

    this.refreshEditorState(session, form, report);
    return form;
  }

  private refreshEditorState(session: CorrectionSession, form: HTMLDivElement, precomputed?: ReturnType<CorrectionSession["validate"]>): void {
    const report = precomputed ?? session.validate();
    for (const name of SECTION_NAMES) {
      const holder = form.querySelector<HTMLDivElement>(`.field-errors[data-section="${name}"]`);
      if (!holder) continue;
      holder.replaceChildren();
      for (const issue of issuesForSection(report, name as SectionName)) {
        holder.appendChild(el("div", "error", `${issue.code}: ${issue.message}`));
      }
      for (const issue of session.serverErrors.filter((i) => i.section === name)) {
        holder.appendChild(el("div", "error server", `server ${issue.code}: ${issue.message}`));
      }
    }
    const submit = form.querySelector<HTMLButtonElement>("button.submit");
    if (submit) submit.disabled = !session.submitEnabled;
    const warning = form.querySelector<HTMLSpanElement>("#mismatch-warning");
    if (warning) {
      warning.textContent = session.conclusionMismatch
        ? `Conclusion disagrees with the ${session.detail.label} ground truth.`
        : "";
    }
  }

  /** Open the next pending case on the current page, if any. */
  private async advance(): Promise<void> {
    const items = this.pager.page?.items ?? [];
    const next = items.find((i) => !i.resolved && i.sample_id !== this.session?.detail.sample_id);
    if (next) await this.openCase(next.sample_id);
  }

  private onKey(ev: KeyboardEvent): void {
    if (ev.target instanceof HTMLTextAreaElement) {
      if (ev.key === "Enter" && (ev.ctrlKey || ev.metaKey) && this.session?.submitEnabled) {
        void this.session.submit().then(() => this.renderCase());
      }
      return;
    }
    if (ev.key === "n" && this.pager.hasNext) {
      void this.guard(() => this.pager.next()).then(() => this.renderQueue());
    } else if (ev.key === "p" && this.pager.hasPrev) {
      void this.guard(() => this.pager.prev()).then(() => this.renderQueue());
    }
  }
}

const baseUrl =
  new URLSearchParams(window.location.search).get("api") ?? "http://127.0.0.1:8000";
void new ReviewApp(baseUrl).start();
