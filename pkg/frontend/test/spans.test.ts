import { describe, expect, it } from "vitest";

import { CATEGORY_COLORS, LABEL_CATEGORY, computeSegments, coveredRange, spanColor } from "../src/spans.js";
import { makeFixtures } from "./fake_service.js";

describe("span segmentation", () => {
  const fixtures = makeFixtures(50, 7);

  it("highlight offsets equal the service payload on 50 fixtures", () => {
    for (const d of fixtures) {
      const segments = computeSegments(d.text, d.model_spans);
      d.model_spans.forEach((span, idx) => {
        const covered = coveredRange(segments, idx);
        expect(covered, `${d.id} span ${idx}`).not.toBeNull();
        expect(covered!.start).toBe(span.start);
        expect(covered!.end).toBe(span.end);
        expect(covered!.text).toBe(d.text.slice(span.start, span.end));
      });
    }
  });

  it("segments tile the whole text without gaps or overlap", () => {
    for (const d of fixtures) {
      const segments = computeSegments(d.text, d.model_spans);
      let pos = 0;
      for (const seg of segments) {
        expect(seg.start).toBe(pos);
        expect(seg.end).toBeGreaterThan(seg.start);
        pos = seg.end;
      }
      expect(pos).toBe(d.text.length);
      expect(segments.map((s) => s.text).join("")).toBe(d.text);
    }
  });

  it("no client-side re-tokenization: segment text is a pure slice", () => {
    const text = "Mrs Bell  wrote — twice.";
    const spans = [{ start: 0, end: 8, label: "Feminine", source: "model:c2",
                     fold: 0, stage: "pnoc", confidence: 0.5, score: null }];
    const segments = computeSegments(text, spans);
    expect(segments[0]!.text).toBe("Mrs Bell");
    expect(segments.map((s) => s.text).join("")).toBe(text);
  });

  it("category colors are fixed for the three taxonomy groups", () => {
    expect(LABEL_CATEGORY["GenderedPronoun"]).toBe("Linguistic");
    expect(LABEL_CATEGORY["Feminine"]).toBe("PersonName");
    expect(LABEL_CATEGORY["Stereotype"]).toBe("Contextual");
    expect(Object.keys(LABEL_CATEGORY)).toHaveLength(10);
    expect(spanColor("GenderedRole")).toBe(CATEGORY_COLORS["Linguistic"]);
    expect(spanColor("Unknown")).toBe(CATEGORY_COLORS["PersonName"]);
    expect(spanColor("Omission")).toBe(CATEGORY_COLORS["Contextual"]);
  });
});
