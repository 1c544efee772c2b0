import { describe, expect, it } from "vitest";

import {
  decisionApplied, decisionRolledBack, detailLoaded, filtersChanged,
  initialState, nextPendingId, progress, queueLoaded, spanSelected,
} from "../src/state.js";
import type { DescriptionDetail, QueueItem, QueuePage } from "../src/types.js";

function item(id: string, status: "pending" | "reviewed" = "pending",
              confidence = 0.5): QueueItem {
  return {
    description_id: id, fonds_id: "F000", fonds_title: "Fonds",
    confidence, status,
    flags: [{ label: "Omission", start: 0, end: 4, stage: "osc", fold: 0,
              confidence, score: 0.1 }],
  };
}

function page(items: QueueItem[]): QueuePage {
  return { items, total: items.length, offset: 0, limit: 50 };
}

describe("progress", () => {
  it("starts at 0 of N before any decision", () => {
    let s = initialState();
    s = queueLoaded(s, page([item("a"), item("b"), item("c")]), 0);
    expect(progress(s)).toEqual({ reviewed: 0, total: 3, fraction: 0 });
  });

  it("increments by exactly 1 per decided item", () => {
    let s = queueLoaded(initialState(), page([item("a"), item("b")]), 0);
    const first = decisionApplied(s, "a");
    expect(first.bumped).toBe(true);
    expect(progress(first.state).reviewed).toBe(1);
    // a second verdict on the same item must not double-count
    const second = decisionApplied(first.state, "a");
    expect(second.bumped).toBe(false);
    expect(progress(second.state).reviewed).toBe(1);
    const third = decisionApplied(second.state, "b");
    expect(progress(third.state)).toEqual({ reviewed: 2, total: 2, fraction: 1 });
  });

  it("rollback undoes the optimistic bump exactly once", () => {
    let s = queueLoaded(initialState(), page([item("a")]), 0);
    const { state: applied, bumped } = decisionApplied(s, "a");
    const rolled = decisionRolledBack(applied, "a", bumped);
    expect(progress(rolled).reviewed).toBe(0);
    expect(rolled.items[0]!.status).toBe("pending");
    // rolling back a non-bumped decision changes nothing
    expect(decisionRolledBack(rolled, "a", false)).toBe(rolled);
  });
});

describe("filters", () => {
  it("changing filters resets the view state", () => {
    let s = queueLoaded(initialState(), page([item("a", "reviewed")]), 1);
    s = filtersChanged(s, { label: "Stereotype", status: "pending" });
    expect(s.items).toEqual([]);
    expect(s.filters).toEqual({ label: "Stereotype", status: "pending" });
    expect(progress(s).reviewed).toBe(0);
  });
});

describe("navigation", () => {
  it("nextPendingId walks past reviewed items and wraps", () => {
    let s = queueLoaded(initialState(),
                        page([item("a", "reviewed"), item("b"), item("c")]), 1);
    expect(nextPendingId(s)).toBe("b");
    const detail: DescriptionDetail = {
      id: "b", fonds_id: "F000", fonds_title: "Fonds", field: "Title",
      text: "text", languages: [], gold_spans: [], model_spans: [],
      decisions: [],
    };
    s = detailLoaded(s, detail);
    expect(nextPendingId(s)).toBe("c");
    const done = decisionApplied(decisionApplied(s, "b").state, "c").state;
    expect(nextPendingId(done)).toBeNull();
  });

  it("span selection is clamped to existing spans", () => {
    const detail: DescriptionDetail = {
      id: "a", fonds_id: "F000", fonds_title: "Fonds", field: "Title",
      text: "some text", languages: [], gold_spans: [],
      model_spans: [{ start: 0, end: 4, label: "Omission", source: "model:c2",
                      fold: 0, stage: "osc", confidence: 0.7, score: 0.5 }],
      decisions: [],
    };
    let s = detailLoaded(initialState(), detail);
    expect(spanSelected(s, 0).selectedSpan).toBe(0);
    expect(spanSelected(s, 5)).toBe(s);    // out of range: unchanged
    expect(spanSelected(s, -1)).toBe(s);
  });
});
