"""Cascade orchestration under the modified five-fold protocol.

For every fold f the upstream models train on the other four folds, the
downstream models train on those folds with upstream predictions injected
as features, and the held-out fold is predicted; concatenating the five
test folds yields model codes for the whole corpus, each description
predicted exactly once by a model that never saw it.

Upstream predictions used as downstream *training* features follow the
run policy: "same-training-folds" (default) featurizes the training folds
with the fold's own upstream model; "nested" featurizes each training fold
with an inner model trained on the remaining three (inner models featurize
their own training data in-sample).

Stage trainers and predictors are pluggable through `Stages`, which lets
tests replace a stage with an oracle while exercising the real plumbing.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .classifiers import (
    LcModel, OscModel, PnocModel,
    predict_lc_scores, predict_osc, predict_pnoc, train_lc, train_osc, train_pnoc,
)
from .classifiers.crf import path_margin
from .corpus import (
    LC_LABELS, OSC_LABELS, PNOC_INJECTED_LABELS, PNOC_LABELS,
    AnnotationSpan, CodeLabel, Corpus, Description, FoldAssignment,
    TokenizedDescription, bio_to_spans, corpus_hash, model_source, preprocess,
    save_folds, to_bio,
)
from .errors import BiaslensError, CorpusMismatch
from .evaluation import AgreementReport, score, write_metrics
from .features import (
    EmbeddingModel, TfidfModel, assemble_doc_features, assemble_token_features,
    fit_tfidf, pack_token_features, train_embeddings,
)


class Variant(str, Enum):
    BASELINE = "baseline"
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"


@dataclass(frozen=True)
class Pipeline:
    stages: tuple[str, ...]
    pnoc_inject: tuple[str, ...]
    osc_inject: tuple[str, ...]


_PIPELINES = {
    Variant.BASELINE: Pipeline(("lc", "pnoc", "osc"), (), ()),
    Variant.C1: Pipeline(("lc", "pnoc", "osc"), ("lc",), ("lc", "pnoc")),
    Variant.C2: Pipeline(("lc", "osc"), (), ("lc",)),
    Variant.C3: Pipeline(("pnoc", "osc"), (), ("pnoc",)),
}

POLICY_SAME = "same-training-folds"
POLICY_NESTED = "nested"


@dataclass(frozen=True)
class EmbeddingConfig:
    dim: int = 100
    window: int = 5
    epochs: int = 5
    negatives: int = 5
    min_count: int = 1
    buckets: int = 200_000
    lr: float = 0.025


@dataclass(frozen=True)
class LcConfig:
    n_trees: int = 100


@dataclass(frozen=True)
class PnocConfig:
    variance: float = 1.0
    max_iterations: int = 100


@dataclass(frozen=True)
class OscConfig:
    alpha: float = 1e-4
    epochs: int = 10


@dataclass(frozen=True)
class CascadeSpec:
    variant: Variant = Variant.BASELINE
    seed: int = 22
    policy: str = POLICY_SAME
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    lc: LcConfig = field(default_factory=LcConfig)
    pnoc: PnocConfig = field(default_factory=PnocConfig)
    osc: OscConfig = field(default_factory=OscConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d


def osc_injected_labels(variant: Variant) -> tuple[CodeLabel, ...]:
    pipe = _PIPELINES[variant]
    labels: tuple[CodeLabel, ...] = ()
    if "lc" in pipe.osc_inject:
        labels += LC_LABELS
    if "pnoc" in pipe.osc_inject:
        labels += PNOC_INJECTED_LABELS
    return labels


def variant_labels(variant: Variant) -> tuple[CodeLabel, ...]:
    pipe = _PIPELINES[variant]
    labels: tuple[CodeLabel, ...] = ()
    if "lc" in pipe.stages:
        labels += LC_LABELS
    if "pnoc" in pipe.stages:
        labels += PNOC_LABELS
    if "osc" in pipe.stages:
        labels += OSC_LABELS
    return labels


class CascadeError(BiaslensError):
    def __init__(self, fold: int, stage: str, cause: Exception):
        self.fold = fold
        self.stage = stage
        self.cause = cause
        super().__init__(f"fold {fold}, stage {stage}: {cause}")


def _sigmoid(x: float) -> float:
    if x > 30.0:
        return 1.0
    if x < -30.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


# --------------------------------------------------------------------------
# Per-fold environment and gold-label extraction

@dataclass
class FoldEnv:
    fold: int
    spec: CascadeSpec
    emb: EmbeddingModel
    tfidf: TfidfModel
    tokenized: Mapping[str, TokenizedDescription]


def gold_token_label_sets(d: Description, t: TokenizedDescription,
                          labels: Sequence[CodeLabel]) -> list[set[CodeLabel]]:
    """Per-token gold label sets: a token carries every selected label whose
    spans it overlaps (multilabel; no BIO structure)."""
    label_set = set(labels)
    sets: list[set[CodeLabel]] = [set() for _ in t.tokens]
    for span in d.annotations:
        if span.label not in label_set:
            continue
        for idx, tok in enumerate(t.tokens):
            if tok.start < span.end and span.start < tok.end:
                sets[idx].add(span.label)
    return sets


def gold_doc_labels(d: Description) -> set[CodeLabel]:
    return {s.label for s in d.annotations if s.label in OSC_LABELS}


def _split_by_sentence(t: TokenizedDescription, flat: Sequence) -> list[list]:
    return [list(flat[lo:hi]) for lo, hi in t.sentences]


# --------------------------------------------------------------------------
# Stage prediction containers and span extraction

@dataclass
class LcPred:
    sets: list[set[CodeLabel]]     # flat, one per token
    fractions: np.ndarray          # (n_tokens, n_chain_labels) vote shares


@dataclass
class PnocPred:
    tags: list[str]                # flat BIO tags, one per token
    margins: list[float]           # one per sentence


@dataclass
class OscPred:
    labels: set[CodeLabel]
    scores: dict[CodeLabel, float]


def lc_pred_spans(t: TokenizedDescription, pred: LcPred, source: str
                  ) -> list[tuple[AnnotationSpan, float]]:
    """Maximal same-label token runs become spans; confidence is the mean
    vote share over the run."""
    out = []
    for j, label in enumerate(LC_LABELS):
        run_start = None
        for idx in range(len(t.tokens) + 1):
            hit = idx < len(t.tokens) and label in pred.sets[idx]
            if hit and run_start is None:
                run_start = idx
            elif not hit and run_start is not None:
                span = AnnotationSpan(t.tokens[run_start].start,
                                      t.tokens[idx - 1].end, label, source)
                conf = float(pred.fractions[run_start:idx, j].mean())
                out.append((span, conf))
                run_start = None
    out.sort(key=lambda sc: (sc[0].start, sc[0].end, sc[0].label.value))
    return out


def pnoc_pred_spans(t: TokenizedDescription, pred: PnocPred, source: str
                    ) -> list[tuple[AnnotationSpan, float]]:
    spans = bio_to_spans(pred.tags, t, source)
    token_sentence = np.zeros(len(t.tokens), dtype=np.int64)
    for s_idx, (lo, hi) in enumerate(t.sentences):
        token_sentence[lo:hi] = s_idx
    out = []
    for span in spans:
        first_tok = next(i for i, tok in enumerate(t.tokens)
                         if tok.start < span.end and span.start < tok.end)
        margin = pred.margins[int(token_sentence[first_tok])]
        out.append((span, _sigmoid(margin)))
    return out


def osc_pred_spans(d: Description, pred: OscPred, source: str
                   ) -> list[tuple[AnnotationSpan, float, float]]:
    out = []
    for label in OSC_LABELS:
        if label in pred.labels:
            raw = pred.scores[label]
            out.append((AnnotationSpan(0, len(d.text), label, source),
                        _sigmoid(raw), raw))
    return out


# --------------------------------------------------------------------------
# Default (production) stage implementations

def default_train_embeddings(descs: Corpus, spec: CascadeSpec,
                             tokenized: Mapping[str, TokenizedDescription]
                             ) -> EmbeddingModel:
    cfg = spec.embedding
    return train_embeddings(descs, dim=cfg.dim, window=cfg.window,
                            epochs=cfg.epochs, negatives=cfg.negatives,
                            min_count=cfg.min_count, seed=spec.seed,
                            buckets=cfg.buckets, lr=cfg.lr,
                            tokenized=dict(tokenized))


def default_fit_tfidf(descs: Corpus,
                      tokenized: Mapping[str, TokenizedDescription]
                      ) -> TfidfModel:
    return fit_tfidf(descs, tokenized=dict(tokenized))


def _token_rows(env: FoldEnv, d: Description,
                injected: list[set[CodeLabel]] | None,
                injected_labels: Sequence[CodeLabel]):
    return assemble_token_features(env.tokenized[d.id], env.emb,
                                   injected=injected,
                                   injected_labels=injected_labels)


def default_train_lc(env: FoldEnv, descs: Corpus) -> LcModel:
    rows, labels = [], []
    for d in descs:
        t = env.tokenized[d.id]
        rows.extend(_token_rows(env, d, None, ()))
        labels.extend(_split_by_sentence(t, gold_token_label_sets(d, t, LC_LABELS)))
    return train_lc(rows, labels, seed=env.spec.seed,
                    n_trees=env.spec.lc.n_trees)


def default_predict_lc(env: FoldEnv, model: LcModel, descs: Corpus
                       ) -> dict[str, LcPred]:
    out: dict[str, LcPred] = {}
    for d in descs:
        t = env.tokenized[d.id]
        rows = _token_rows(env, d, None, ())
        sets_nested, fracs_nested = predict_lc_scores(model, rows)
        flat_sets = [s for sent in sets_nested for s in sent]
        fracs = (np.vstack(fracs_nested) if fracs_nested
                 else np.zeros((0, len(LC_LABELS))))
        out[d.id] = LcPred(sets=flat_sets, fractions=fracs)
    return out


def default_train_pnoc(env: FoldEnv, descs: Corpus,
                       lc_pred: Mapping[str, LcPred] | None) -> PnocModel:
    injected_labels = LC_LABELS if lc_pred is not None else ()
    rows, tag_rows = [], []
    for d in descs:
        t = env.tokenized[d.id]
        injected = lc_pred[d.id].sets if lc_pred is not None else None
        rows.extend(_token_rows(env, d, injected, injected_labels))
        tag_rows.extend(_split_by_sentence(t, to_bio(d, t, PNOC_LABELS)))
    return train_pnoc(rows, tag_rows, variance=env.spec.pnoc.variance,
                      max_iterations=env.spec.pnoc.max_iterations,
                      injected_labels=injected_labels)


def default_predict_pnoc(env: FoldEnv, model: PnocModel, descs: Corpus,
                         lc_pred: Mapping[str, LcPred] | None
                         ) -> dict[str, PnocPred]:
    out: dict[str, PnocPred] = {}
    injected_labels = model.injected_labels
    for d in descs:
        t = env.tokenized[d.id]
        injected = lc_pred[d.id].sets if lc_pred is not None else None
        rows = _token_rows(env, d, injected, injected_labels)
        tags_nested, _ = predict_pnoc(model, rows)
        margins = [path_margin(model, X)
                   for X in pack_token_features(rows, injected_labels)]
        out[d.id] = PnocPred(tags=[t_ for sent in tags_nested for t_ in sent],
                             margins=margins)
    return out


def default_train_osc(env: FoldEnv, descs: Corpus,
                      injected_spans: Mapping[str, list[AnnotationSpan]] | None,
                      injected_labels: Sequence[CodeLabel]) -> OscModel:
    vectors, labels = [], []
    for d in descs:
        spans = injected_spans.get(d.id, []) if injected_spans else None
        vectors.append(assemble_doc_features(
            d, env.tfidf, injected_spans=spans,
            injected_labels=injected_labels, tokenized=env.tokenized[d.id]))
        labels.append(gold_doc_labels(d))
    return train_osc(vectors, labels, epochs=env.spec.osc.epochs,
                     seed=env.spec.seed, alpha=env.spec.osc.alpha)


def default_predict_osc(env: FoldEnv, model: OscModel, descs: Corpus,
                        injected_spans: Mapping[str, list[AnnotationSpan]] | None,
                        injected_labels: Sequence[CodeLabel]
                        ) -> dict[str, OscPred]:
    vectors = []
    for d in descs:
        spans = injected_spans.get(d.id, []) if injected_spans else None
        vectors.append(assemble_doc_features(
            d, env.tfidf, injected_spans=spans,
            injected_labels=injected_labels, tokenized=env.tokenized[d.id]))
    label_sets, score_maps = predict_osc(model, vectors)
    return {d.id: OscPred(labels=ls, scores=sm)
            for d, ls, sm in zip(descs, label_sets, score_maps)}


@dataclass
class Stages:
    train_embeddings: Callable = default_train_embeddings
    fit_tfidf: Callable = default_fit_tfidf
    train_lc: Callable = default_train_lc
    predict_lc: Callable = default_predict_lc
    train_pnoc: Callable = default_train_pnoc
    predict_pnoc: Callable = default_predict_pnoc
    train_osc: Callable = default_train_osc
    predict_osc: Callable = default_predict_osc


# --------------------------------------------------------------------------
# Model fitting and prediction for one training set

@dataclass
class FoldModels:
    lc: LcModel | None = None
    pnoc: PnocModel | None = None
    osc: OscModel | None = None

    def degenerate_flags(self) -> dict:
        flags: dict = {}
        lc_flags = getattr(self.lc, "degenerate_stages", None)
        if lc_flags:
            flags["lc"] = lc_flags
        osc_flags = getattr(self.osc, "degenerate_labels", None)
        if osc_flags:
            flags["osc"] = osc_flags
        return flags


def _injected_osc_spans(env: FoldEnv, pipe: Pipeline, descs: Corpus,
                        lc_pred, pnoc_pred) -> dict[str, list[AnnotationSpan]]:
    spans: dict[str, list[AnnotationSpan]] = {d.id: [] for d in descs}
    src = model_source(env.spec.variant.value)
    for d in descs:
        t = env.tokenized[d.id]
        if "lc" in pipe.osc_inject and lc_pred is not None:
            spans[d.id] += [s for s, _ in lc_pred_spans(t, lc_pred[d.id], src)]
        if "pnoc" in pipe.osc_inject and pnoc_pred is not None:
            spans[d.id] += [s for s, _ in pnoc_pred_spans(t, pnoc_pred[d.id], src)]
    return spans


def _nested_upstream(env: FoldEnv, stages: Stages, groups: list[Corpus],
                     want_pnoc: bool) -> tuple[dict, dict]:
    """Inner-fold upstream predictions: each training group featurized by
    models trained on the other groups."""
    lc_out: dict[str, LcPred] = {}
    pnoc_out: dict[str, PnocPred] = {}
    pipe = _PIPELINES[env.spec.variant]
    for i, group in enumerate(groups):
        inner_train = [d for j, g in enumerate(groups) if j != i for d in g]
        inner_lc = None
        if "lc" in pipe.stages:
            inner_lc = stages.train_lc(env, inner_train)
            lc_out.update(stages.predict_lc(env, inner_lc, group))
        if want_pnoc:
            inner_lc_feats = None
            if "lc" in pipe.pnoc_inject:
                inner_lc_feats = stages.predict_lc(env, inner_lc, inner_train)
            inner_pnoc = stages.train_pnoc(env, inner_train, inner_lc_feats)
            group_lc = ({k: v for k, v in lc_out.items()
                         if k in {d.id for d in group}}
                        if "lc" in pipe.pnoc_inject else None)
            pnoc_out.update(stages.predict_pnoc(env, inner_pnoc, group, group_lc))
    return lc_out, pnoc_out


def _fit_models(env: FoldEnv, stages: Stages, train: Corpus,
                groups: list[Corpus] | None) -> FoldModels:
    """Train the variant's stages on one training set, wiring upstream
    predictions into downstream training features per the policy."""
    spec = env.spec
    pipe = _PIPELINES[spec.variant]
    nested = spec.policy == POLICY_NESTED and groups is not None
    models = FoldModels()

    lc_needed_downstream = ("lc" in pipe.pnoc_inject) or ("lc" in pipe.osc_inject)
    pnoc_needed_downstream = "pnoc" in pipe.osc_inject

    lc_train_pred = pnoc_train_pred = None
    if nested and (lc_needed_downstream or pnoc_needed_downstream):
        lc_train_pred, pnoc_train_pred = _nested_upstream(
            env, stages, groups, want_pnoc=pnoc_needed_downstream)

    if "lc" in pipe.stages:
        models.lc = stages.train_lc(env, train)
        if lc_needed_downstream and not nested:
            lc_train_pred = stages.predict_lc(env, models.lc, train)

    if "pnoc" in pipe.stages:
        lc_feats = lc_train_pred if "lc" in pipe.pnoc_inject else None
        models.pnoc = stages.train_pnoc(env, train, lc_feats)
        if pnoc_needed_downstream and not nested:
            pnoc_train_pred = stages.predict_pnoc(env, models.pnoc, train, lc_feats)

    if "osc" in pipe.stages:
        inj_labels = osc_injected_labels(spec.variant)
        inj_spans = (_injected_osc_spans(env, pipe, train,
                                         lc_train_pred, pnoc_train_pred)
                     if pipe.osc_inject else None)
        models.osc = stages.train_osc(env, train, inj_spans, inj_labels)
    return models


def _predict(env: FoldEnv, stages: Stages, models: FoldModels, descs: Corpus
             ) -> dict[str, dict]:
    pipe = _PIPELINES[env.spec.variant]
    out: dict[str, dict] = {}
    lc_pred = pnoc_pred = None
    if models.lc is not None:
        lc_pred = stages.predict_lc(env, models.lc, descs)
        out["lc"] = lc_pred
    if models.pnoc is not None:
        lc_feats = lc_pred if "lc" in pipe.pnoc_inject else None
        pnoc_pred = stages.predict_pnoc(env, models.pnoc, descs, lc_feats)
        out["pnoc"] = pnoc_pred
    if models.osc is not None:
        inj_labels = osc_injected_labels(env.spec.variant)
        inj_spans = (_injected_osc_spans(env, pipe, descs, lc_pred, pnoc_pred)
                     if pipe.osc_inject else None)
        out["osc"] = stages.predict_osc(env, models.osc, descs, inj_spans,
                                        inj_labels)
    return out


# --------------------------------------------------------------------------
# The cross-validation run

@dataclass
class PredRecord:
    id: str
    start: int
    end: int
    label: CodeLabel
    source: str
    fold: int
    stage: str
    confidence: float
    score: float | None = None

    def to_json(self) -> str:
        rec = {"id": self.id, "start": self.start, "end": self.end,
               "label": self.label.value, "source": self.source,
               "fold": self.fold, "stage": self.stage,
               "confidence": round(self.confidence, 9)}
        if self.score is not None:
            rec["score"] = round(self.score, 9)
        return json.dumps(rec, ensure_ascii=False, separators=(",", ":"))

    def span(self) -> AnnotationSpan:
        return AnnotationSpan(self.start, self.end, self.label, self.source)


_STAGE_ORDER = {"lc": 0, "pnoc": 1, "osc": 2}


@dataclass
class CascadeRun:
    spec: CascadeSpec
    folds: FoldAssignment
    predictions: list[PredRecord]
    corpus_hash: str
    fold_flags: dict[int, dict]
    metrics: AgreementReport | None = None
    models: list[FoldModels] | None = None

    def prediction_map(self, corpus: Corpus) -> dict[str, list[AnnotationSpan]]:
        spans: dict[str, list[AnnotationSpan]] = {d.id: [] for d in corpus}
        for rec in self.predictions:
            spans[rec.id].append(rec.span())
        return spans

    def manifest(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "corpus_hash": self.corpus_hash,
            "kernel_backend": kernels.BACKEND,
            "fold_flags": {str(k): v for k, v in self.fold_flags.items()},
            "pipeline": {
                "stages": list(_PIPELINES[self.spec.variant].stages),
                "pnoc_inject": list(_PIPELINES[self.spec.variant].pnoc_inject),
                "osc_inject": list(_PIPELINES[self.spec.variant].osc_inject),
                "osc_injected_labels": [l.value for l in
                                        osc_injected_labels(self.spec.variant)],
            },
        }


def _records_for(env: FoldEnv, descs: Corpus, stage_preds: dict[str, dict],
                 fold: int, variant: Variant) -> list[PredRecord]:
    src = model_source(variant.value)
    records: list[PredRecord] = []
    for d in descs:
        t = env.tokenized[d.id]
        if "lc" in stage_preds:
            for span, conf in lc_pred_spans(t, stage_preds["lc"][d.id], src):
                records.append(PredRecord(d.id, span.start, span.end,
                                          span.label, src, fold, "lc", conf))
        if "pnoc" in stage_preds:
            for span, conf in pnoc_pred_spans(t, stage_preds["pnoc"][d.id], src):
                records.append(PredRecord(d.id, span.start, span.end,
                                          span.label, src, fold, "pnoc", conf))
        if "osc" in stage_preds:
            for span, conf, raw in osc_pred_spans(d, stage_preds["osc"][d.id], src):
                records.append(PredRecord(d.id, span.start, span.end,
                                          span.label, src, fold, "osc", conf,
                                          score=raw))
    return records


def run_cascade(corpus: Corpus, spec: CascadeSpec, folds: FoldAssignment,
                stages: Stages | None = None, keep_models: bool = False,
                compute_metrics: bool = True) -> CascadeRun:
    stages = stages or Stages()
    ids = {d.id for d in corpus}
    fold_union = set().union(*folds.folds) if folds.folds else set()
    if fold_union != ids:
        raise CorpusMismatch("fold assignment does not partition this corpus")

    tokenized = {d.id: preprocess(d) for d in corpus}
    records: list[PredRecord] = []
    fold_flags: dict[int, dict] = {}
    kept: list[FoldModels] = []

    for fold in range(folds.k):
        test_ids = folds.folds[fold]
        train = [d for d in corpus if d.id not in test_ids]
        test = [d for d in corpus if d.id in test_ids]
        groups = [[d for d in train if d.id in folds.folds[g]]
                  for g in range(folds.k) if g != fold]
        stage = "features"
        try:
            emb = stages.train_embeddings(train, spec, tokenized)
            tfidf = stages.fit_tfidf(train, tokenized)
            env = FoldEnv(fold=fold, spec=spec, emb=emb, tfidf=tfidf,
                          tokenized=tokenized)
            stage = "train"
            models = _fit_models(env, stages, train, groups)
            stage = "predict"
            preds = _predict(env, stages, models, test)
        except BiaslensError as exc:
            raise CascadeError(fold, stage, exc) from exc
        records.extend(_records_for(env, test, preds, fold, spec.variant))
        flags = models.degenerate_flags()
        epochs_run = getattr(models.pnoc, "epochs_run", None)
        if epochs_run is not None:
            flags["pnoc_epochs"] = epochs_run
        fold_flags[fold] = flags
        if keep_models:
            kept.append(models)

    records.sort(key=lambda r: (r.id, _STAGE_ORDER[r.stage], r.start, r.end,
                                r.label.value))
    run = CascadeRun(spec=spec, folds=folds, predictions=records,
                     corpus_hash=corpus_hash(corpus), fold_flags=fold_flags,
                     models=kept if keep_models else None)
    if compute_metrics:
        run.metrics = score(run.prediction_map(corpus), corpus,
                            labels=variant_labels(spec.variant))
    return run


# --------------------------------------------------------------------------
# Run directory I/O

def write_run(run: CascadeRun, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(run.manifest(), fh, ensure_ascii=False, indent=2,
                  sort_keys=True)
        fh.write("\n")
    save_folds(run.folds, out / "folds.json")
    with open(out / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for rec in run.predictions:
            fh.write(rec.to_json())
            fh.write("\n")
    if run.metrics is not None:
        write_metrics(run.metrics, out / "metrics.json")


def load_predictions(path: str | Path) -> list[PredRecord]:
    records: list[PredRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            records.append(PredRecord(
                id=rec["id"], start=rec["start"], end=rec["end"],
                label=CodeLabel(rec["label"]), source=rec["source"],
                fold=rec.get("fold", -1), stage=rec.get("stage", ""),
                confidence=rec.get("confidence", 0.0),
                score=rec.get("score")))
    return records


def prediction_span_map(records: Sequence[PredRecord],
                        corpus: Corpus | None = None
                        ) -> dict[str, list[AnnotationSpan]]:
    spans: dict[str, list[AnnotationSpan]] = (
        {d.id: [] for d in corpus} if corpus is not None else {})
    for rec in records:
        spans.setdefault(rec.id, []).append(rec.span())
    return spans


# --------------------------------------------------------------------------
# Whole-corpus training (the `train` / `predict` commands)

@dataclass
class TrainedPipeline:
    spec: CascadeSpec
    emb: EmbeddingModel
    tfidf: TfidfModel
    models: FoldModels
    corpus_hash: str


def train_pipeline(corpus: Corpus, spec: CascadeSpec,
                   stages: Stages | None = None) -> TrainedPipeline:
    """Train every stage of the variant on the full corpus.  Downstream
    training features come from the upstream models' own in-sample
    predictions (the same-training-folds reading, without folds)."""
    stages = stages or Stages()
    tokenized = {d.id: preprocess(d) for d in corpus}
    emb = stages.train_embeddings(corpus, spec, tokenized)
    tfidf = stages.fit_tfidf(corpus, tokenized)
    env = FoldEnv(fold=-1, spec=spec, emb=emb, tfidf=tfidf, tokenized=tokenized)
    models = _fit_models(env, stages, corpus, groups=None)
    return TrainedPipeline(spec=spec, emb=emb, tfidf=tfidf, models=models,
                           corpus_hash=corpus_hash(corpus))


def predict_pipeline(pipe: TrainedPipeline, corpus: Corpus,
                     stages: Stages | None = None) -> list[PredRecord]:
    stages = stages or Stages()
    tokenized = {d.id: preprocess(d) for d in corpus}
    env = FoldEnv(fold=-1, spec=pipe.spec, emb=pipe.emb, tfidf=pipe.tfidf,
                  tokenized=tokenized)
    preds = _predict(env, stages, pipe.models, corpus)
    records = _records_for(env, corpus, preds, -1, pipe.spec.variant)
    records.sort(key=lambda r: (r.id, _STAGE_ORDER[r.stage], r.start, r.end,
                                r.label.value))
    return records


def compare_runs(runs: Sequence[CascadeRun], gold: Corpus,
                 labels: Sequence[CodeLabel] = OSC_LABELS) -> list[dict]:
    """Per-variant comparison rows: per-label then macro and micro
    precision/recall/F1, in the layout of the paper-style report tables."""
    rows: list[dict] = []
    for run in runs:
        if run.corpus_hash != corpus_hash(gold):
            raise CorpusMismatch("run was produced on a different corpus")
        report = score(run.prediction_map(gold), gold, labels=labels)
        for label in labels:
            s = report.per_label[label]
            rows.append({"variant": run.spec.variant.value,
                         "scope": label.value, "precision": s.precision,
                         "recall": s.recall, "f1": s.f1})
        for scope, triple in (("macro", report.macro), ("micro", report.micro)):
            rows.append({"variant": run.spec.variant.value, "scope": scope,
                         "precision": triple[0], "recall": triple[1],
                         "f1": triple[2]})
    return rows
