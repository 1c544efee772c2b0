/** Payload types of the review service HTTP API (the only backend surface
 * this app talks to). */

export interface SpanFlag {
  label: string;
  start: number;
  end: number;
  stage: string;
  fold: number;
  confidence: number;
  score: number | null;
}

export interface QueueItem {
  description_id: string;
  fonds_id: string;
  fonds_title: string;
  confidence: number;
  flags: SpanFlag[];
  status: "pending" | "reviewed";
}

export interface QueuePage {
  items: QueueItem[];
  total: number;
  offset: number;
  limit: number;
}

export interface GoldSpan {
  start: number;
  end: number;
  label: string;
  source: string;
}

export interface ModelSpan extends GoldSpan {
  fold: number;
  stage: string;
  confidence: number;
  score: number | null;
}

export interface DecisionRecord {
  seq: number;
  decision_id: string;
  idempotency_key: string | null;
  timestamp: number;
  description_id: string;
  span: { start: number; end: number; label: string };
  verdict: Verdict;
  note: string;
  reviewer: string;
}

export interface DescriptionDetail {
  id: string;
  fonds_id: string;
  fonds_title: string;
  field: string;
  text: string;
  languages: string[];
  gold_spans: GoldSpan[];
  model_spans: ModelSpan[];
  decisions: DecisionRecord[];
}

export type Verdict = "accept" | "reject" | "unsure";

export interface DecisionDraft {
  description_id: string;
  span: { start: number; end: number; label: string };
  verdict: Verdict;
  note: string;
  reviewer: string;
}

export interface QueueFilters {
  label?: string;
  fonds?: string;
  status?: "pending" | "reviewed";
}
