"""TF-IDF document vectors with smoothed idf and L2 normalization.

idf(t) = ln((1 + N) / (1 + df(t))) + 1 over raw term counts; unseen terms
are ignored at transform time.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..corpus import Corpus, Description, TokenizedDescription, preprocess
from ..errors import EmptyCorpus, NotFitted


@dataclass
class TfidfModel:
    vocabulary: dict[str, int] | None = None
    idf: np.ndarray | None = None
    smooth_idf: bool = True
    norm: str = "l2"

    @property
    def fitted(self) -> bool:
        return self.vocabulary is not None and self.idf is not None

    @property
    def n_features(self) -> int:
        self._require_fitted()
        return len(self.vocabulary)

    def _require_fitted(self) -> None:
        if not self.fitted:
            raise NotFitted("tfidf model has not been fitted")


def _terms(d: Description | TokenizedDescription | list[str],
           tokenized: dict[str, TokenizedDescription] | None = None
           ) -> list[str]:
    if isinstance(d, list):
        return d
    if isinstance(d, Description):
        t = tokenized[d.id] if tokenized else preprocess(d)
    else:
        t = d
    return [tok.surface for tok in t.tokens]


def fit_tfidf(corpus: Corpus,
              tokenized: dict[str, TokenizedDescription] | None = None
              ) -> TfidfModel:
    if not corpus:
        raise EmptyCorpus("cannot fit tf-idf on an empty corpus")
    df: dict[str, int] = {}
    for d in corpus:
        for term in set(_terms(d, tokenized)):
            df[term] = df.get(term, 0) + 1
    vocabulary = {term: i for i, term in enumerate(sorted(df))}
    n = len(corpus)
    idf = np.empty(len(vocabulary), dtype=np.float64)
    for term, i in vocabulary.items():
        idf[i] = math.log((1.0 + n) / (1.0 + df[term])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf)


def transform(m: TfidfModel, d: Description | TokenizedDescription | list[str],
              tokenized: dict[str, TokenizedDescription] | None = None
              ) -> sp.csr_matrix:
    """One document to a 1 x V L2-normalized row."""
    m._require_fitted()
    counts: dict[int, float] = {}
    for term in _terms(d, tokenized):
        idx = m.vocabulary.get(term)
        if idx is not None:
            counts[idx] = counts.get(idx, 0.0) + 1.0
    if not counts:
        return sp.csr_matrix((1, len(m.vocabulary)), dtype=np.float64)
    cols = np.array(sorted(counts), dtype=np.int32)
    vals = np.array([counts[c] for c in cols], dtype=np.float64) * m.idf[cols]
    if m.norm == "l2":
        norm = math.sqrt(float(np.dot(vals, vals)))
        if norm > 0:
            vals = vals / norm
    return sp.csr_matrix((vals, cols, np.array([0, len(cols)])),
                         shape=(1, len(m.vocabulary)))


def transform_many(m: TfidfModel, docs,
                   tokenized: dict[str, TokenizedDescription] | None = None
                   ) -> sp.csr_matrix:
    rows = [transform(m, d, tokenized) for d in docs]
    if not rows:
        m._require_fitted()
        return sp.csr_matrix((0, len(m.vocabulary)), dtype=np.float64)
    return sp.vstack(rows, format="csr")


def save_tfidf(m: TfidfModel, path: str | Path) -> None:
    m._require_fitted()
    payload = {
        "vocabulary": m.vocabulary,
        "idf": m.idf.tolist(),
        "config": {"smooth_idf": m.smooth_idf, "norm": m.norm},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_tfidf(path: str | Path) -> TfidfModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return TfidfModel(vocabulary=payload["vocabulary"],
                      idf=np.array(payload["idf"], dtype=np.float64),
                      smooth_idf=payload["config"]["smooth_idf"],
                      norm=payload["config"]["norm"])
