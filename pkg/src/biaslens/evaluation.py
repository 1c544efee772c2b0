"""Loose-match span agreement scoring.

Two spans agree when they share at least one character and carry the same
label.  Counting is per side: a predicted span is a true positive when it
overlaps any same-label gold span (else a false positive); a gold span
unmatched by every prediction is a false negative.  Precision uses the
prediction-side matched count, recall the gold-side matched count, so
score(A, B).recall == score(B, A).precision holds exactly.  All 0/0 ratios
resolve to 0.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import AnnotationSpan, CodeLabel, Corpus, Description, OSC_LABELS
from .errors import CorpusMismatch, TooFewAnnotators

SpanMap = dict[str, list[AnnotationSpan]]


def spans_by_description(source: Corpus | Mapping[str, Sequence[AnnotationSpan]]
                         ) -> SpanMap:
    if isinstance(source, Mapping):
        return {k: list(v) for k, v in source.items()}
    return {d.id: list(d.annotations) for d in source}


@dataclass
class LabelCounts:
    tp_pred: int = 0   # predicted spans matched by >=1 same-label gold span
    fp: int = 0        # predicted spans matched by none
    tp_gold: int = 0   # gold spans matched by >=1 prediction
    fn: int = 0        # gold spans matched by none
    tn: int = 0        # document level only: in neither side

    def add(self, other: "LabelCounts") -> None:
        self.tp_pred += other.tp_pred
        self.fp += other.fp
        self.tp_gold += other.tp_gold
        self.fn += other.fn
        self.tn += other.tn


def _ratio(num: int | float, den: int | float) -> float:
    return num / den if den else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if (p + r) else 0.0


def prf(c: LabelCounts) -> tuple[float, float, float]:
    p = _ratio(c.tp_pred, c.tp_pred + c.fp)
    r = _ratio(c.tp_gold, c.tp_gold + c.fn)
    return p, r, _f1(p, r)


def loose_match(pred: Sequence[AnnotationSpan], gold: Sequence[AnnotationSpan],
                label: CodeLabel) -> LabelCounts:
    """Counts for one description and one label."""
    ps = [s for s in pred if s.label == label]
    gs = [s for s in gold if s.label == label]
    c = LabelCounts()
    for p in ps:
        if any(p.overlaps(g) for g in gs):
            c.tp_pred += 1
        else:
            c.fp += 1
    for g in gs:
        if any(g.overlaps(p) for p in ps):
            c.tp_gold += 1
        else:
            c.fn += 1
    return c


@dataclass
class LabelScore:
    precision: float
    recall: float
    f1: float
    counts: LabelCounts


@dataclass
class AgreementReport:
    per_label: dict[CodeLabel, LabelScore]
    macro: tuple[float, float, float]
    micro: tuple[float, float, float]
    doc_level_labels: tuple[CodeLabel, ...] = ()
    n_reports: int = 1  # >1 when this is an average

    def to_dict(self) -> dict:
        out: dict = {}
        for label, s in self.per_label.items():
            entry = {"precision": s.precision, "recall": s.recall, "f1": s.f1,
                     "tp": s.counts.tp_pred, "fp": s.counts.fp,
                     "fn": s.counts.fn}
            if label in self.doc_level_labels:
                entry["tn"] = s.counts.tn
            out[label.value] = entry
        out["macro"] = dict(zip(("precision", "recall", "f1"), self.macro))
        out["micro"] = dict(zip(("precision", "recall", "f1"), self.micro))
        out["conventions"] = {"zero_division": "0"}
        return out


def write_metrics(report: AgreementReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, ensure_ascii=False, indent=2,
                  sort_keys=True)
        fh.write("\n")


def score(predictions: Corpus | Mapping, gold: Corpus | Mapping,
          labels: Sequence[CodeLabel] = tuple(CodeLabel),
          doc_level_labels: Sequence[CodeLabel] = OSC_LABELS
          ) -> AgreementReport:
    """Per-label, macro (over labels present in gold), and micro scores.
    Document-level labels additionally count true negatives: descriptions
    where the label appears on neither side."""
    pred_map = spans_by_description(predictions)
    gold_map = spans_by_description(gold)
    if set(pred_map) != set(gold_map):
        raise CorpusMismatch(
            f"{len(pred_map)} predicted vs {len(gold_map)} gold descriptions"
            " with differing id sets")

    totals = {label: LabelCounts() for label in labels}
    for desc_id in gold_map:
        pred = pred_map[desc_id]
        gold_spans = gold_map[desc_id]
        for label in labels:
            c = loose_match(pred, gold_spans, label)
            if label in doc_level_labels and not c.tp_gold and not c.fn \
                    and not c.tp_pred and not c.fp:
                c.tn += 1
            totals[label].add(c)

    per_label = {}
    for label in labels:
        p, r, f = prf(totals[label])
        per_label[label] = LabelScore(p, r, f, totals[label])

    in_gold = [label for label in labels
               if totals[label].tp_gold + totals[label].fn > 0]
    if in_gold:
        macro = tuple(
            sum(getattr(per_label[l], k) for l in in_gold) / len(in_gold)
            for k in ("precision", "recall", "f1"))
    else:
        macro = (0.0, 0.0, 0.0)

    micro_counts = LabelCounts()
    for label in labels:
        micro_counts.add(totals[label])
    micro = prf(micro_counts)

    return AgreementReport(per_label=per_label, macro=macro, micro=micro,
                           doc_level_labels=tuple(doc_level_labels))


def _average_reports(reports: list[AgreementReport]) -> AgreementReport:
    n = len(reports)
    labels = list(reports[0].per_label)
    per_label = {}
    for label in labels:
        counts = LabelCounts()
        for rep in reports:
            counts.add(rep.per_label[label].counts)
        per_label[label] = LabelScore(
            precision=sum(r.per_label[label].precision for r in reports) / n,
            recall=sum(r.per_label[label].recall for r in reports) / n,
            f1=sum(r.per_label[label].f1 for r in reports) / n,
            counts=counts)
    macro = tuple(sum(r.macro[i] for r in reports) / n for i in range(3))
    micro = tuple(sum(r.micro[i] for r in reports) / n for i in range(3))
    return AgreementReport(per_label=per_label, macro=macro, micro=micro,
                           doc_level_labels=reports[0].doc_level_labels,
                           n_reports=n)


def pairwise_iaa(annotator_sets: Mapping[str, Corpus | Mapping],
                 labels: Sequence[CodeLabel] = tuple(CodeLabel)
                 ) -> AgreementReport:
    """score() over every unordered coder pair (first coder, by name, as
    the reference side), then the arithmetic mean of the reports.  Counts
    in the result are summed across pairs."""
    if len(annotator_sets) < 2:
        raise TooFewAnnotators(f"{len(annotator_sets)} annotator(s), need >= 2")
    names = sorted(annotator_sets)
    reports = [
        score(annotator_sets[b], annotator_sets[a], labels=labels)
        for a, b in itertools.combinations(names, 2)
    ]
    return _average_reports(reports)


def coders_vs_reference(annotator_sets: Mapping[str, Corpus | Mapping],
                        reference: Corpus | Mapping,
                        labels: Sequence[CodeLabel] = tuple(CodeLabel)
                        ) -> AgreementReport:
    """Each coder scored against the fixed reference, then averaged."""
    if not annotator_sets:
        raise TooFewAnnotators("no annotator sets given")
    reports = [
        score(annotator_sets[name], reference, labels=labels)
        for name in sorted(annotator_sets)
    ]
    return _average_reports(reports)
