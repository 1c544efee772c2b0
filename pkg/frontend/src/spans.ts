/** Span highlighting.
 *
 * Segments are computed strictly from the service's character offsets;
 * the text is never re-tokenized client-side, so what is highlighted is
 * exactly what the model flagged.
 */
import type { ModelSpan } from "./types.js";

/** Taxonomy category per code, mirroring the coding taxonomy's three
 * groups; the color mapping is fixed across sessions. */
export const LABEL_CATEGORY: Record<string, "Linguistic" | "PersonName" | "Contextual"> = {
  GenderedPronoun: "Linguistic",
  GenderedRole: "Linguistic",
  Generalization: "Linguistic",
  Feminine: "PersonName",
  Masculine: "PersonName",
  NonBinary: "PersonName",
  Unknown: "PersonName",
  Occupation: "Contextual",
  Omission: "Contextual",
  Stereotype: "Contextual",
};

export const CATEGORY_COLORS: Record<string, string> = {
  Linguistic: "#d97706",
  PersonName: "#2563eb",
  Contextual: "#dc2626",
};

export function spanColor(label: string): string {
  const category = LABEL_CATEGORY[label];
  return category ? CATEGORY_COLORS[category] ?? "#555" : "#555";
}

export interface Segment {
  start: number;
  end: number;
  text: string;
  /** indexes into the span list, every span covering this segment */
  spans: number[];
}

/**
 * Split text into contiguous segments at span boundaries.  Segments cover
 * [0, text.length) exactly; each input span is the union of the segments
 * that reference it.
 */
export function computeSegments(text: string, spans: ModelSpan[]): Segment[] {
  const cuts = new Set<number>([0, text.length]);
  for (const s of spans) {
    cuts.add(Math.max(0, Math.min(s.start, text.length)));
    cuts.add(Math.max(0, Math.min(s.end, text.length)));
  }
  const points = [...cuts].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const start = points[i]!;
    const end = points[i + 1]!;
    if (end <= start) continue;
    const covering: number[] = [];
    spans.forEach((s, idx) => {
      if (s.start <= start && end <= s.end) covering.push(idx);
    });
    segments.push({ start, end, text: text.slice(start, end), spans: covering });
  }
  return segments;
}

/** Reassemble the character range a span covers from its segments; used to
 * assert offsets round-trip exactly. */
export function coveredRange(segments: Segment[], spanIdx: number):
    { start: number; end: number; text: string } | null {
  const mine = segments.filter((seg) => seg.spans.includes(spanIdx));
  if (!mine.length) return null;
  return {
    start: mine[0]!.start,
    end: mine[mine.length - 1]!.end,
    text: mine.map((seg) => seg.text).join(""),
  };
}
