"""Gender and gender-biased language dashboard artifacts.

Per-fonds rankings of model codes, language tables, description and word
count breakdowns, and model-quality charts, written as CSV/JSON plus
dependency-free SVG bar charts.  Output bytes are a pure function of the
input data (stable ordering, fixed number formatting, no timestamps), so
golden-file tests stay valid.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .cascade import CascadeRun, PredRecord
from .corpus import LC_LABELS, OSC_LABELS, CodeLabel, Corpus, preprocess
from .errors import UnknownLabel
from .evaluation import AgreementReport


@dataclass
class FondsRanking:
    label: CodeLabel
    rows: list[tuple[str, str, int]]  # (fonds_id, fonds_title, count)


@dataclass
class BiasBreakdown:
    stereotype_only: int
    both: int
    omission_only: int
    word_counts: dict[CodeLabel, int]

    @property
    def flagged_total(self) -> int:
        return self.stereotype_only + self.both + self.omission_only


@dataclass
class QualityChart:
    rows: dict[CodeLabel, dict[str, float]]


@dataclass
class DashboardData:
    rankings: list[FondsRanking]
    languages: list[tuple[str, int]]
    breakdown: BiasBreakdown
    quality: QualityChart | None = None


def _records(predictions: CascadeRun | Sequence[PredRecord]) -> list[PredRecord]:
    if isinstance(predictions, CascadeRun):
        return predictions.predictions
    return list(predictions)


def fonds_rankings(predictions: CascadeRun | Sequence[PredRecord],
                   corpus: Corpus, label: CodeLabel | str,
                   n: int = 10) -> FondsRanking:
    """Top-n fonds by model span count for one label; ties break on
    fonds_id."""
    if not isinstance(label, CodeLabel):
        try:
            label = CodeLabel(label)
        except ValueError:
            raise UnknownLabel(str(label)) from None
    fonds_title = {d.fonds_id: d.fonds_title for d in corpus}
    desc_fonds = {d.id: d.fonds_id for d in corpus}
    counts: dict[str, int] = {}
    for rec in _records(predictions):
        if rec.label == label and rec.id in desc_fonds:
            fid = desc_fonds[rec.id]
            counts[fid] = counts.get(fid, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
    return FondsRanking(label=label, rows=[
        (fid, fonds_title.get(fid, ""), c) for fid, c in ordered])


def language_table(corpus: Corpus, fonds_ids: Iterable[str]
                   ) -> list[tuple[str, int]]:
    """(language, fonds count) for the given fonds, most common first;
    counts fonds, not descriptions."""
    wanted = set(fonds_ids)
    fonds_langs: dict[str, set[str]] = {}
    for d in corpus:
        if d.fonds_id in wanted:
            fonds_langs.setdefault(d.fonds_id, set()).update(d.languages)
    counts: dict[str, int] = {}
    for langs in fonds_langs.values():
        for lang in langs:
            counts[lang] = counts.get(lang, 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def bias_breakdown(predictions: CascadeRun | Sequence[PredRecord],
                   corpus: Corpus) -> BiasBreakdown:
    """Disjoint description buckets by document code, plus the count of
    tokens covered by each Linguistic code's predicted spans."""
    doc_labels: dict[str, set[CodeLabel]] = {}
    spans_by_desc: dict[str, list[PredRecord]] = {}
    for rec in _records(predictions):
        if rec.label in OSC_LABELS:
            doc_labels.setdefault(rec.id, set()).add(rec.label)
        if rec.label in LC_LABELS:
            spans_by_desc.setdefault(rec.id, []).append(rec)

    stereotype_only = both = omission_only = 0
    for labels in doc_labels.values():
        has_o = CodeLabel.OMISSION in labels
        has_s = CodeLabel.STEREOTYPE in labels
        if has_o and has_s:
            both += 1
        elif has_s:
            stereotype_only += 1
        elif has_o:
            omission_only += 1

    word_counts = {label: 0 for label in LC_LABELS}
    by_id = {d.id: d for d in corpus}
    for desc_id, recs in spans_by_desc.items():
        t = preprocess(by_id[desc_id])
        for label in LC_LABELS:
            spans = [r for r in recs if r.label == label]
            if not spans:
                continue
            covered = sum(
                1 for tok in t.tokens
                if any(tok.start < r.end and r.start < tok.end for r in spans))
            word_counts[label] += covered
    return BiasBreakdown(stereotype_only=stereotype_only, both=both,
                         omission_only=omission_only, word_counts=word_counts)


def quality_chart(report: AgreementReport,
                  labels: Sequence[CodeLabel]) -> QualityChart:
    rows: dict[CodeLabel, dict[str, float]] = {}
    for label in labels:
        c = report.per_label[label].counts
        total = c.tp_pred + c.fp + c.fn + c.tn
        row: dict[str, float] = {"tp": c.tp_pred, "fp": c.fp, "fn": c.fn,
                                 "tn": c.tn}
        for key in ("tp", "fp", "fn", "tn"):
            row[f"{key}_pct"] = round(100.0 * row[key] / total, 3) if total else 0.0
        rows[label] = row
    return QualityChart(rows=rows)


def build_dashboard(predictions: CascadeRun | Sequence[PredRecord],
                    corpus: Corpus,
                    ranking_labels: Sequence[CodeLabel] = OSC_LABELS,
                    top_n: int = 10,
                    report: AgreementReport | None = None,
                    quality_labels: Sequence[CodeLabel] | None = None
                    ) -> DashboardData:
    rankings = [fonds_rankings(predictions, corpus, label, n=top_n)
                for label in ranking_labels]
    ranked_fonds = {fid for r in rankings for fid, _, _ in r.rows}
    quality = None
    if report is not None:
        quality = quality_chart(report, quality_labels or list(report.per_label))
    return DashboardData(rankings=rankings,
                         languages=language_table(corpus, ranked_fonds),
                         breakdown=bias_breakdown(predictions, corpus),
                         quality=quality)


# --------------------------------------------------------------------------
# Rendering

_BAR = "#4a7aa5"


def _svg_bar_chart(title: str, rows: list[tuple[str, float]],
                   value_fmt: str = "{:g}") -> str:
    width, bar_h, gap, left, top = 640, 18, 6, 220, 34
    height = top + len(rows) * (bar_h + gap) + 12
    peak = max((v for _, v in rows), default=0.0) or 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<style>text{{font:12px sans-serif}}.t{{font:bold 13px sans-serif}}</style>',
        f'<text class="t" x="8" y="18">{title}</text>',
    ]
    for i, (name, value) in enumerate(rows):
        y = top + i * (bar_h + gap)
        w = round((width - left - 80) * value / peak, 2)
        parts.append(f'<text x="{left - 8}" y="{y + 13}" text-anchor="end">'
                     f'{name}</text>')
        parts.append(f'<rect x="{left}" y="{y}" width="{w}" '
                     f'height="{bar_h}" fill="{_BAR}"/>')
        parts.append(f'<text x="{left + w + 6}" y="{y + 13}">'
                     + value_fmt.format(value) + "</text>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render(data: DashboardData, out_dir: str | Path,
           formats: Iterable[str] = ("json", "csv", "svg")) -> list[Path]:
    """Write the dashboard files; byte-stable for identical input."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats = set(formats)
    written: list[Path] = []

    def _write(name: str, content: str) -> None:
        path = out / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        written.append(path)

    if "csv" in formats:
        for ranking in data.rankings:
            rows = [["fonds_id", "fonds_title", "count"]]
            rows += [[fid, title, str(c)] for fid, title, c in ranking.rows]
            _write(f"rankings_{ranking.label.value}.csv",
                   "".join(",".join(_csv_quote(c) for c in r) + "\r\n"
                           for r in rows))
        lang_rows = [["language", "fonds_count"]]
        lang_rows += [[lang, str(c)] for lang, c in data.languages]
        _write("languages.csv",
               "".join(",".join(_csv_quote(c) for c in r) + "\r\n"
                       for r in lang_rows))

    if "json" in formats:
        _write("breakdown.json", json.dumps({
            "stereotype_only": data.breakdown.stereotype_only,
            "both": data.breakdown.both,
            "omission_only": data.breakdown.omission_only,
            "flagged_total": data.breakdown.flagged_total,
            "word_counts": {l.value: c
                            for l, c in data.breakdown.word_counts.items()},
        }, indent=2, sort_keys=True) + "\n")
        if data.quality is not None:
            _write("quality.json", json.dumps(
                {l.value: row for l, row in data.quality.rows.items()},
                indent=2, sort_keys=True) + "\n")

    if "svg" in formats:
        for ranking in data.rankings:
            _write(f"rankings_{ranking.label.value}.svg", _svg_bar_chart(
                f"Fonds with the most {ranking.label.value} codes",
                [(f"{title} ({fid})" if title else fid, float(c))
                 for fid, title, c in ranking.rows]))
        _write("breakdown.svg", _svg_bar_chart(
            "Descriptions flagged as gender biased",
            [("Stereotype only", float(data.breakdown.stereotype_only)),
             ("Omission and Stereotype", float(data.breakdown.both)),
             ("Omission only", float(data.breakdown.omission_only))]))
        _write("words.svg", _svg_bar_chart(
            "Words coded as gendered language",
            [(l.value, float(c))
             for l, c in data.breakdown.word_counts.items()]))
        if data.quality is not None:
            rows = []
            for label, row in data.quality.rows.items():
                for key, nice in (("fp", "extra"), ("tp", "correct"),
                                  ("fn", "missed"), ("tn", "correctly not coded")):
                    rows.append((f"{label.value}: {nice}", float(row[key])))
            _write("quality.svg",
                   _svg_bar_chart("Model quality by code", rows))
    return written


def _csv_quote(cell: str) -> str:
    if any(ch in cell for ch in ",\"\r\n"):
        return '"' + cell.replace('"', '""') + '"'
    return cell
