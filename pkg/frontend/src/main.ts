/** DOM wiring for the triage app.
 *
 * Keyboard shortcuts: a = accept, r = reject, u = unsure (on the selected
 * span), n = next pending description, tab/click selects spans.
 */
import { DecisionOutbox, ReviewApi } from "./api.js";
import { computeSegments, spanColor } from "./spans.js";
import {
  AppState, decisionApplied, decisionRolledBack, detailLoaded,
  filtersChanged, initialState, nextPendingId, progress, queueLoaded,
  spanSelected, withError,
} from "./state.js";
import type { QueueFilters, Verdict } from "./types.js";

const LABELS = [
  "GenderedPronoun", "GenderedRole", "Generalization", "Feminine",
  "Masculine", "NonBinary", "Unknown", "Occupation", "Omission", "Stereotype",
];

const api = new ReviewApi("");
const outbox = new DecisionOutbox(api);
let state: AppState = initialState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function refreshQueue(): Promise<void> {
  try {
    const page = await api.getQueue(state.filters, 200, 0);
    const reviewed = page.items.filter((it) => it.status === "reviewed").length;
    state = queueLoaded(state, page, reviewed);
  } catch (err) {
    state = withError(state, String(err));
  }
  render();
}

async function openDescription(id: string): Promise<void> {
  try {
    state = detailLoaded(state, await api.getDescription(id));
  } catch (err) {
    state = withError(state, String(err));
  }
  render();
}

async function decide(verdict: Verdict): Promise<void> {
  const detail = state.detail;
  if (!detail || !detail.model_spans.length) return;
  const span = detail.model_spans[state.selectedSpan] ?? detail.model_spans[0]!;
  const draft = {
    description_id: detail.id,
    span: { start: span.start, end: span.end, label: span.label },
    verdict,
    note: el<HTMLTextAreaElement>("note").value,
    reviewer: el<HTMLInputElement>("reviewer").value || "anonymous",
  };
  const { state: next, bumped } = decisionApplied(state, detail.id);
  state = next;
  render();
  const entry = outbox.enqueue(draft);
  try {
    await outbox.submit(entry, 4);
    el<HTMLTextAreaElement>("note").value = "";
    await refreshQueue();
    await openDescription(detail.id);
  } catch (err) {
    state = withError(decisionRolledBack(state, detail.id, bumped),
                      `verdict not saved (will not be lost): ${String(err)}`);
    render();
  }
}

function readFilters(): QueueFilters {
  const filters: QueueFilters = {};
  const label = el<HTMLSelectElement>("filter-label").value;
  const fonds = el<HTMLInputElement>("filter-fonds").value.trim();
  const status = el<HTMLSelectElement>("filter-status").value;
  if (label) filters.label = label;
  if (fonds) filters.fonds = fonds;
  if (status === "pending" || status === "reviewed") filters.status = status;
  return filters;
}

function render(): void {
  const bar = el<HTMLDivElement>("progress-bar");
  const p = progress(state);
  bar.style.width = `${(p.fraction * 100).toFixed(1)}%`;
  el<HTMLSpanElement>("progress-text").textContent =
    `${p.reviewed} / ${p.total} reviewed`;

  const errBox = el<HTMLDivElement>("error");
  errBox.textContent = state.error ?? "";
  errBox.style.display = state.error ? "block" : "none";

  const list = el<HTMLUListElement>("queue");
  list.replaceChildren(...state.items.map((item) => {
    const li = document.createElement("li");
    li.className = item.description_id === state.activeId ? "active" : "";
    const labels = [...new Set(item.flags.map((f) => f.label))].join(", ");
    li.innerHTML =
      `<span class="conf">${item.confidence.toFixed(2)}</span> ` +
      `<span class="qid">${item.description_id}</span> ` +
      `<span class="labels">${labels}</span>` +
      `<span class="status ${item.status}">${item.status}</span>`;
    li.addEventListener("click", () => void openDescription(item.description_id));
    return li;
  }));

  renderDetail();
}

function renderDetail(): void {
  const box = el<HTMLDivElement>("description");
  const meta = el<HTMLDivElement>("span-meta");
  const detail = state.detail;
  if (!detail) {
    box.textContent = "Select a description from the queue.";
    meta.textContent = "";
    return;
  }
  el<HTMLDivElement>("fonds").textContent =
    `${detail.fonds_title} (${detail.fonds_id}) — ${detail.field}`;
  const segments = computeSegments(detail.text, detail.model_spans);
  box.replaceChildren(...segments.map((seg) => {
    if (!seg.spans.length) {
      return document.createTextNode(seg.text);
    }
    const mark = document.createElement("mark");
    const first = seg.spans[0]!;
    mark.textContent = seg.text;
    mark.style.backgroundColor = `${spanColor(detail.model_spans[first]!.label)}33`;
    mark.style.borderBottom = `2px solid ${spanColor(detail.model_spans[first]!.label)}`;
    if (seg.spans.includes(state.selectedSpan)) mark.classList.add("selected");
    mark.addEventListener("click", () => {
      state = spanSelected(state, first);
      render();
    });
    return mark;
  }));

  const span = detail.model_spans[state.selectedSpan];
  if (span) {
    meta.textContent =
      `${span.label} [${span.start}, ${span.end}) — stage ${span.stage}, ` +
      `fold ${span.fold}, source ${span.source}, ` +
      `confidence ${span.confidence.toFixed(3)}` +
      (span.score !== null ? `, score ${span.score.toFixed(3)}` : "");
  } else {
    meta.textContent = "no model spans on this description";
  }

  const history = el<HTMLUListElement>("history");
  history.replaceChildren(...detail.decisions.map((d) => {
    const li = document.createElement("li");
    li.textContent = `#${d.seq} ${d.verdict} ${d.span.label} ` +
      `[${d.span.start}, ${d.span.end}) by ${d.reviewer || "?"}` +
      (d.note ? ` — ${d.note}` : "");
    return li;
  }));
}

function bind(): void {
  el<HTMLButtonElement>("btn-accept").addEventListener("click", () => void decide("accept"));
  el<HTMLButtonElement>("btn-reject").addEventListener("click", () => void decide("reject"));
  el<HTMLButtonElement>("btn-unsure").addEventListener("click", () => void decide("unsure"));
  el<HTMLButtonElement>("btn-next").addEventListener("click", () => {
    const id = nextPendingId(state);
    if (id) void openDescription(id);
  });
  document.addEventListener("keydown", (ev) => {
    const target = ev.target as HTMLElement;
    if (target.tagName === "TEXTAREA" || target.tagName === "INPUT") return;
    if (ev.key === "a") void decide("accept");
    else if (ev.key === "r") void decide("reject");
    else if (ev.key === "u") void decide("unsure");
    else if (ev.key === "n") {
      const id = nextPendingId(state);
      if (id) void openDescription(id);
    }
  });
  const labelSelect = el<HTMLSelectElement>("filter-label");
  for (const label of LABELS) {
    const opt = document.createElement("option");
    opt.value = label;
    opt.textContent = label;
    labelSelect.append(opt);
  }
  for (const id of ["filter-label", "filter-fonds", "filter-status"]) {
    el(id).addEventListener("change", () => {
      state = filtersChanged(state, readFilters());
      void refreshQueue();
    });
  }
}

bind();
void refreshQueue();
