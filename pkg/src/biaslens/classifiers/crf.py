"""Multiclass sequence classifier: linear-chain CRF trained with AROW.

Tags are BIO over the person-name codes plus Occupation, with O first in
enumeration order (the Viterbi tie-break).  Parameters live in one flat
vector: emission weights per tag, transition scores for every ordered tag
pair (present even when unseen in training), and initial/final scores.

AROW keeps a mean vector and a diagonal covariance.  Per sequence, with
feature delta d = phi(gold) - phi(decoded) and margin m = mu . d:
confidence v = d' Sigma d, beta = 1/(v + r), alpha = max(0, 1 - m) * beta,
mu += alpha * Sigma d, Sigma -= beta * (Sigma d)^2.  Covariance entries
stay in (0, r] and never grow.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import kernels
from ..corpus import CodeLabel, PNOC_LABELS
from ..errors import AlignmentError, FeatureShapeMismatch
from ..features.assemble import TokenFeatureRow, canonical_label_order, pack_token_features


def make_tags(labels: Sequence[CodeLabel] = PNOC_LABELS) -> tuple[str, ...]:
    tags = ["O"]
    for lab in labels:
        tags.append(f"B-{lab.value}")
        tags.append(f"I-{lab.value}")
    return tuple(tags)


@dataclass
class PnocModel:
    tags: tuple[str, ...]
    feature_dim: int
    mu: np.ndarray
    sigma: np.ndarray
    variance: float
    max_iterations: int
    epochs_run: int
    injected_labels: tuple[CodeLabel, ...]

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    def _views(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        T, D = self.n_tags, self.feature_dim
        W = self.mu[:T * D].reshape(T, D)
        A = self.mu[T * D:T * D + T * T].reshape(T, T)
        init = self.mu[T * D + T * T:T * D + T * T + T]
        final = self.mu[T * D + T * T + T:]
        return W, A, init, final


def _as_matrices(sentences, injected_labels) -> list[np.ndarray]:
    if sentences and isinstance(sentences[0], np.ndarray):
        return [np.ascontiguousarray(s, dtype=np.float64) for s in sentences]
    return [np.ascontiguousarray(m, dtype=np.float64)
            for m in pack_token_features(sentences, injected_labels)]


def _phi(X: np.ndarray, path: np.ndarray, T: int, D: int) -> np.ndarray:
    phi = np.zeros(T * D + T * T + 2 * T)
    W = phi[:T * D].reshape(T, D)
    np.add.at(W, path, X)
    A = phi[T * D:T * D + T * T].reshape(T, T)
    if len(path) > 1:
        np.add.at(A, (path[:-1], path[1:]), 1.0)
    phi[T * D + T * T + path[0]] += 1.0
    phi[T * D + T * T + T + path[-1]] += 1.0
    return phi


def _decode(m: PnocModel, X: np.ndarray) -> tuple[np.ndarray, float]:
    W, A, init, final = m._views()
    emit = np.ascontiguousarray(X @ W.T)
    return kernels.viterbi(emit, np.ascontiguousarray(A),
                           np.ascontiguousarray(init),
                           np.ascontiguousarray(final))


def arow_update(mu: np.ndarray, sigma: np.ndarray, delta: np.ndarray,
                r: float) -> bool:
    """One AROW step on (mu, sigma) in place for feature delta, skipped
    when the margin is already >= 1.  Returns whether an update happened."""
    margin = float(mu @ delta)
    if margin >= 1.0:
        return False
    sd = sigma * delta
    v = float(sd @ delta)
    beta = 1.0 / (v + r)
    alpha = max(0.0, 1.0 - margin) * beta
    mu += alpha * sd
    sigma -= beta * sd * sd
    return True


def train_pnoc(sentences: Sequence, tag_sequences: Sequence[Sequence[str]],
               variance: float = 1.0, max_iterations: int = 100,
               labels: Sequence[CodeLabel] = PNOC_LABELS,
               injected_labels: Sequence[CodeLabel] = ()) -> PnocModel:
    """`sentences` holds TokenFeatureRow lists (or pre-packed float
    matrices); `tag_sequences` the aligned gold BIO tags."""
    injected_labels = canonical_label_order(injected_labels)
    mats = _as_matrices(sentences, injected_labels)
    if len(mats) != len(tag_sequences):
        raise AlignmentError(
            f"{len(mats)} sentences vs {len(tag_sequences)} tag sequences")
    tags = make_tags(labels)
    tag_index = {t: i for i, t in enumerate(tags)}
    D = next((m.shape[1] for m in mats if m.size), 0)
    T = len(tags)

    gold: list[np.ndarray] = []
    keep: list[np.ndarray] = []
    for X, seq in zip(mats, tag_sequences):
        if X.shape[0] != len(seq):
            raise AlignmentError(
                f"sentence of {X.shape[0]} tokens has {len(seq)} tags")
        if X.shape[0] == 0:
            continue
        try:
            gold.append(np.array([tag_index[t] for t in seq], dtype=np.int64))
        except KeyError as exc:
            raise AlignmentError(f"tag {exc.args[0]!r} outside the tag set") from None
        keep.append(X)

    model = PnocModel(tags=tags, feature_dim=D,
                      mu=np.zeros(T * D + T * T + 2 * T),
                      sigma=np.full(T * D + T * T + 2 * T, variance),
                      variance=variance, max_iterations=max_iterations,
                      epochs_run=0, injected_labels=injected_labels)
    for epoch in range(max_iterations):
        updates = 0
        for X, g in zip(keep, gold):
            path, _ = _decode(model, X)
            if np.array_equal(path, g):
                continue
            delta = _phi(X, g, T, D) - _phi(X, path, T, D)
            if arow_update(model.mu, model.sigma, delta, variance):
                updates += 1
        model.epochs_run = epoch + 1
        if updates == 0:
            break
    return model


def predict_pnoc(m: PnocModel, sentences: Sequence
                 ) -> tuple[list[list[str]], list[float]]:
    """Viterbi tag sequences plus per-sentence path scores."""
    mats = _as_matrices(sentences, m.injected_labels)
    out_tags: list[list[str]] = []
    scores: list[float] = []
    for X in mats:
        if X.shape[0] == 0:
            out_tags.append([])
            scores.append(0.0)
            continue
        if X.shape[1] != m.feature_dim:
            raise FeatureShapeMismatch(m.feature_dim, X.shape[1])
        path, score = _decode(m, X)
        out_tags.append([m.tags[i] for i in path])
        scores.append(score)
    return out_tags, scores


def path_margin(m: PnocModel, X: np.ndarray) -> float:
    """Best-vs-second-best gap of the final Viterbi layer, length-normalized.
    Review-queue confidence heuristic, not a probability."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        return 0.0
    W, A, init, final = m._views()
    emit = X @ W.T
    dp = init + emit[0]
    for t in range(1, X.shape[0]):
        dp = (dp[:, None] + A).max(axis=0) + emit[t]
    dp = dp + final
    if len(dp) < 2:
        return 0.0
    top = np.partition(dp, -2)
    return float((top[-1] - top[-2]) / X.shape[0])
