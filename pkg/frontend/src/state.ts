/** Pure view-model state.  Every transition returns a new state object;
 * the DOM layer only renders what is here plus local draft inputs, so a
 * refresh rebuilds the identical view from the service. */
import type { DescriptionDetail, QueueFilters, QueueItem, QueuePage } from "./types.js";

export interface AppState {
  filters: QueueFilters;
  items: QueueItem[];
  total: number;
  reviewed: number;          // under the current filter
  activeId: string | null;
  detail: DescriptionDetail | null;
  selectedSpan: number;      // index into detail.model_spans
  error: string | null;
}

export function initialState(): AppState {
  return {
    filters: {},
    items: [],
    total: 0,
    reviewed: 0,
    activeId: null,
    detail: null,
    selectedSpan: 0,
    error: null,
  };
}

export function filtersChanged(state: AppState, filters: QueueFilters): AppState {
  return { ...initialState(), filters };
}

export function queueLoaded(state: AppState, page: QueuePage,
                            reviewedTotal: number): AppState {
  return {
    ...state,
    items: page.items,
    total: page.total,
    reviewed: reviewedTotal,
    error: null,
  };
}

export function detailLoaded(state: AppState, detail: DescriptionDetail): AppState {
  return { ...state, activeId: detail.id, detail, selectedSpan: 0, error: null };
}

export function spanSelected(state: AppState, index: number): AppState {
  if (!state.detail || index < 0 ||
      index >= state.detail.model_spans.length) {
    return state;
  }
  return { ...state, selectedSpan: index };
}

/** Optimistic mark: flips the item to reviewed and bumps progress by one
 * exactly when the item was still pending.  Returns the new state and
 * whether a rollback would need to undo the bump. */
export function decisionApplied(state: AppState, descId: string):
    { state: AppState; bumped: boolean } {
  let bumped = false;
  const items = state.items.map((item) => {
    if (item.description_id === descId && item.status === "pending") {
      bumped = true;
      return { ...item, status: "reviewed" as const };
    }
    return item;
  });
  return {
    state: { ...state, items, reviewed: state.reviewed + (bumped ? 1 : 0) },
    bumped,
  };
}

export function decisionRolledBack(state: AppState, descId: string,
                                   bumped: boolean): AppState {
  if (!bumped) return state;
  const items = state.items.map((item) =>
    item.description_id === descId
      ? { ...item, status: "pending" as const }
      : item);
  return { ...state, items, reviewed: state.reviewed - 1 };
}

export function progress(state: AppState): { reviewed: number; total: number;
                                             fraction: number } {
  const fraction = state.total ? state.reviewed / state.total : 0;
  return { reviewed: state.reviewed, total: state.total, fraction };
}

/** The next item after the active one that still awaits review. */
export function nextPendingId(state: AppState): string | null {
  const ids = state.items;
  const from = state.activeId
    ? ids.findIndex((it) => it.description_id === state.activeId) + 1
    : 0;
  for (let i = 0; i < ids.length; i++) {
    const item = ids[(from + i) % ids.length]!;
    if (item.status === "pending") return item.description_id;
  }
  return null;
}

export function withError(state: AppState, message: string): AppState {
  return { ...state, error: message };
}
