"""Multilabel document classifier: one-vs-rest linear SVMs trained with
SGD on hinge loss plus L2 regularization.

Step size follows the inverse schedule 1/(alpha*(t0+t)) with the usual
warm-start t0 = 1/(alpha*typw), typw = sqrt(1/sqrt(alpha)).  A label with
single-class training data degenerates to a constant classifier (zero
weights, intercept -1 or +1) and is flagged in the model manifest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .. import kernels
from ..corpus import CodeLabel, OSC_LABELS
from ..errors import EmptyTrainingSet, FeatureShapeMismatch
from ..features.assemble import DocFeatureVector, pack_doc_features


@dataclass
class LinearBinarySvm:
    w: np.ndarray
    intercept: float
    t: int
    constant: int | None = None  # 0 or 1 when training was single-class

    def scores(self, X: sp.csr_matrix) -> np.ndarray:
        return np.asarray(X @ self.w).ravel() + self.intercept


@dataclass
class OscModel:
    labels: tuple[CodeLabel, ...]
    svms: dict[CodeLabel, LinearBinarySvm]
    n_features: int
    alpha: float
    epochs: int
    seed: int
    objective: dict[CodeLabel, list[float]] = field(default_factory=dict)

    @property
    def degenerate_labels(self) -> dict[str, int]:
        return {lab.value: svm.constant for lab, svm in self.svms.items()
                if svm.constant is not None}


def _as_matrix(vectors) -> sp.csr_matrix:
    if sp.issparse(vectors):
        return vectors.tocsr()
    return pack_doc_features(vectors)


def _objective(X: sp.csr_matrix, y: np.ndarray, w: np.ndarray,
               intercept: float, alpha: float) -> float:
    scores = np.asarray(X @ w).ravel() + intercept
    hinge = np.maximum(0.0, 1.0 - y * scores).mean()
    return float(hinge + 0.5 * alpha * float(w @ w))


def train_osc(vectors: Sequence[DocFeatureVector] | sp.csr_matrix,
              labels: Sequence[set[CodeLabel]], epochs: int = 10,
              seed: int = 22, alpha: float = 1e-4,
              osc_labels: tuple[CodeLabel, ...] = OSC_LABELS) -> OscModel:
    X = _as_matrix(vectors)
    n, D = X.shape
    if n == 0:
        raise EmptyTrainingSet("no documents to train on")
    if len(labels) != n:
        raise EmptyTrainingSet(f"{len(labels)} label sets for {n} documents")
    X = sp.csr_matrix(X, dtype=np.float64)
    indices = X.indices.astype(np.int64)
    indptr = X.indptr.astype(np.int64)

    typw = math.sqrt(1.0 / math.sqrt(alpha))
    t0 = 1.0 / (alpha * typw)

    svms: dict[CodeLabel, LinearBinarySvm] = {}
    objective: dict[CodeLabel, list[float]] = {}
    for label_idx, lab in enumerate(osc_labels):
        y = np.array([1.0 if lab in s else -1.0 for s in labels])
        if y.min() == y.max():
            svms[lab] = LinearBinarySvm(w=np.zeros(D), intercept=float(y[0]),
                                        t=0, constant=int(y[0] > 0))
            objective[lab] = []
            continue
        rng = np.random.default_rng(np.random.SeedSequence((seed, label_idx)))
        w = np.zeros(D)
        intercept = 0.0
        t = 0
        history = []
        for _ in range(epochs):
            order = rng.permutation(n).astype(np.int64)
            intercept, t = kernels.hinge_epoch(
                X.data, indices, indptr, y, order, w, intercept, alpha, t0, t)
            history.append(_objective(X, y, w, intercept, alpha))
        svms[lab] = LinearBinarySvm(w=w, intercept=intercept, t=t)
        objective[lab] = history
    return OscModel(labels=tuple(osc_labels), svms=svms, n_features=D,
                    alpha=alpha, epochs=epochs, seed=seed, objective=objective)


def predict_osc(m: OscModel, vectors: Sequence[DocFeatureVector] | sp.csr_matrix
                ) -> tuple[list[set[CodeLabel]], list[dict[CodeLabel, float]]]:
    """Label sets (score > 0) plus raw per-label decision scores."""
    X = _as_matrix(vectors)
    if X.shape[0] == 0:
        return [], []
    if X.shape[1] != m.n_features:
        raise FeatureShapeMismatch(m.n_features, X.shape[1])
    X = sp.csr_matrix(X, dtype=np.float64)
    all_scores = {lab: m.svms[lab].scores(X) for lab in m.labels}
    label_sets: list[set[CodeLabel]] = []
    score_maps: list[dict[CodeLabel, float]] = []
    for i in range(X.shape[0]):
        row_scores = {lab: float(all_scores[lab][i]) for lab in m.labels}
        label_sets.append({lab for lab, s in row_scores.items() if s > 0.0})
        score_maps.append(row_scores)
    return label_sets, score_maps
