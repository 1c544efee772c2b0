"""Test doubles for cascade stages.

The oracle upstream stages emit the gold codes; the planted downstream OSC
predicts a deterministic function of its injected features.  Together they
exercise the cascade plumbing end to end: if injection, fold wiring, or
span conversion is broken anywhere, downstream F1 drops below 1.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from biaslens.cascade import LcPred, OscPred, PnocPred, Stages, gold_token_label_sets
from biaslens.corpus import (
    LC_LABELS, OSC_LABELS, PNOC_LABELS, AnnotationSpan, CodeLabel, to_bio,
)
from biaslens.synthetic import synthetic_corpus

OMIT, STEREO = OSC_LABELS


def oracle_stages(trigger: CodeLabel) -> Stages:
    """All-stub stage set: upstream oracles emit gold codes, the OSC
    predicts Omission exactly when an injected span carries `trigger`."""

    def no_features(*args, **kwargs):
        return None

    def train_stub(*args, **kwargs):
        return "oracle"

    def predict_lc(env, model, descs):
        out = {}
        for d in descs:
            t = env.tokenized[d.id]
            sets = gold_token_label_sets(d, t, LC_LABELS)
            out[d.id] = LcPred(sets=sets,
                               fractions=np.ones((len(t.tokens),
                                                  len(LC_LABELS))))
        return out

    def predict_pnoc(env, model, descs, lc_pred):
        out = {}
        for d in descs:
            t = env.tokenized[d.id]
            tags = to_bio(d, t, PNOC_LABELS)
            out[d.id] = PnocPred(tags=tags, margins=[1.0] * len(t.sentences))
        return out

    def predict_osc(env, model, descs, injected_spans, injected_labels):
        out = {}
        for d in descs:
            spans = injected_spans.get(d.id, []) if injected_spans else []
            hit = any(s.label is trigger for s in spans)
            out[d.id] = OscPred(
                labels={OMIT} if hit else set(),
                scores={OMIT: 1.0 if hit else -1.0, STEREO: -1.0})
        return out

    return Stages(train_embeddings=no_features, fit_tfidf=no_features,
                  train_lc=train_stub, predict_lc=predict_lc,
                  train_pnoc=train_stub, predict_pnoc=predict_pnoc,
                  train_osc=train_stub, predict_osc=predict_osc)


def planted_osc_corpus(trigger: CodeLabel, n: int = 40, seed: int = 21):
    """Synthetic corpus whose gold Omission label is exactly 'description
    contains a gold `trigger` span'."""
    corpus = synthetic_corpus(n, seed=seed)
    out = []
    for d in corpus:
        spans = [s for s in d.annotations if s.label not in OSC_LABELS]
        if any(s.label is trigger for s in spans):
            spans.append(AnnotationSpan(0, len(d.text), OMIT))
        out.append(dataclasses.replace(d, annotations=tuple(sorted(spans))))
    return out
