"""Multilabel token classifier: a chain of binary random forests.

Chain order is fixed (GenderedPronoun, GenderedRole, Generalization); stage
i consumes the base features plus the earlier stages' labels (gold during
training, predictions at inference).  Forests use gini impurity, sqrt
feature subsampling, bootstrap resampling, no depth cap, and 100 trees.
Each tree derives its own seed from (seed, stage, tree index), so results
do not depend on scheduling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import kernels
from ..corpus import CodeLabel, LC_LABELS
from ..errors import AlignmentError, EmptyTrainingSet, FeatureShapeMismatch
from ..features.assemble import TokenFeatureRow, canonical_label_order, pack_token_features


@dataclass
class RandomForestBinary:
    """Flattened forest: per-node arrays plus tree offsets.  `constant` is
    set instead when training labels were single-class."""

    n_trees: int
    n_features: int
    features: np.ndarray | None = None    # int32, -1 marks leaves
    thresholds: np.ndarray | None = None  # float64
    lefts: np.ndarray | None = None       # int32
    rights: np.ndarray | None = None      # int32
    leaf_class: np.ndarray | None = None  # int64
    tree_offsets: np.ndarray | None = None
    constant: int | None = None

    def votes(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise FeatureShapeMismatch(self.n_features, X.shape[1])
        if self.constant is not None:
            return np.full(X.shape[0], self.constant * self.n_trees,
                           dtype=np.int64)
        return kernels.forest_votes(
            np.ascontiguousarray(X, dtype=np.float64), self.features,
            self.thresholds, self.lefts, self.rights, self.leaf_class,
            self.tree_offsets)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.votes(X) * 2 > self.n_trees

    def vote_fraction(self, X: np.ndarray) -> np.ndarray:
        return self.votes(X) / float(self.n_trees)


def _build_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator,
                max_feats: int, nodes: dict) -> int:
    """Grow one tree on a bootstrap resample; returns its root node index.
    Node records are appended to the shared flat arrays in `nodes`."""
    n, n_features = X.shape
    boot = rng.integers(0, n, size=n)
    Xb = X[boot]
    yb = y[boot].astype(np.uint8)

    feats_l, thr_l, left_l, right_l, leaf_l = (
        nodes["features"], nodes["thresholds"], nodes["lefts"],
        nodes["rights"], nodes["leaf_class"])

    def new_node() -> int:
        feats_l.append(-1)
        thr_l.append(0.0)
        left_l.append(-1)
        right_l.append(-1)
        leaf_l.append(0)
        return len(feats_l) - 1

    root = new_node()
    stack = [(root, np.arange(n, dtype=np.int64))]
    while stack:
        node_id, rows = stack.pop()
        ys = yb[rows]
        pos = int(ys.sum())
        if pos == 0 or pos == len(rows) or len(rows) < 2:
            leaf_l[node_id] = 1 if 2 * pos > len(rows) else 0
            continue
        cand = rng.permutation(n_features)[:max_feats]
        col, thr, _ = kernels.best_split_binary(
            np.ascontiguousarray(Xb[np.ix_(rows, cand)]), ys)
        if col < 0:  # all sampled features constant on this node
            leaf_l[node_id] = 1 if 2 * pos > len(rows) else 0
            continue
        feat = int(cand[col])
        mask = Xb[rows, feat] <= thr
        left_id = new_node()
        right_id = new_node()
        feats_l[node_id] = feat
        thr_l[node_id] = thr
        left_l[node_id] = left_id
        right_l[node_id] = right_id
        stack.append((right_id, rows[~mask]))
        stack.append((left_id, rows[mask]))
    return root


def fit_forest(X: np.ndarray, y: np.ndarray, n_trees: int = 100,
               seed: int = 22, stage: int = 0) -> RandomForestBinary:
    n, n_features = X.shape
    if n == 0:
        raise EmptyTrainingSet("no rows to fit a forest on")
    y = np.asarray(y).astype(np.uint8)
    if y.min() == y.max():
        return RandomForestBinary(n_trees=n_trees, n_features=n_features,
                                  constant=int(y[0]))
    max_feats = max(1, int(math.sqrt(n_features)))
    nodes = {"features": [], "thresholds": [], "lefts": [], "rights": [],
             "leaf_class": []}
    offsets = [0]
    X = np.ascontiguousarray(X, dtype=np.float64)
    for tree in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence((seed, stage, tree)))
        root = _build_tree(X, y, rng, max_feats, nodes)
        assert root == offsets[-1]
        offsets.append(len(nodes["features"]))
    return RandomForestBinary(
        n_trees=n_trees, n_features=n_features,
        features=np.array(nodes["features"], dtype=np.int32),
        thresholds=np.array(nodes["thresholds"], dtype=np.float64),
        lefts=np.array(nodes["lefts"], dtype=np.int32),
        rights=np.array(nodes["rights"], dtype=np.int32),
        leaf_class=np.array(nodes["leaf_class"], dtype=np.int64),
        tree_offsets=np.array(offsets, dtype=np.int64))


@dataclass
class LcModel:
    labels: tuple[CodeLabel, ...]
    stages: list[RandomForestBinary]
    base_dim: int
    injected_labels: tuple[CodeLabel, ...]
    n_trees: int
    seed: int

    @property
    def degenerate_stages(self) -> dict[str, int]:
        return {lab.value: s.constant for lab, s in zip(self.labels, self.stages)
                if s.constant is not None}


def _flatten(rows: Sequence[Sequence[TokenFeatureRow]],
             injected_labels) -> np.ndarray:
    packed = pack_token_features(rows, injected_labels)
    mats = [m for m in packed if m.size]
    if not mats:
        width = packed[0].shape[1] if packed else 0
        return np.zeros((0, width))
    return np.vstack(mats)


def train_lc(rows: Sequence[Sequence[TokenFeatureRow]],
             labels: Sequence[Sequence[set[CodeLabel]]],
             seed: int = 22, n_trees: int = 100,
             injected_labels: Sequence[CodeLabel] = (),
             chain: tuple[CodeLabel, ...] = LC_LABELS) -> LcModel:
    """`rows` and `labels` are parallel per-sentence lists; each label entry
    is the set of codes on that token."""
    if len(rows) != len(labels):
        raise AlignmentError(f"{len(rows)} sentences vs {len(labels)} label rows")
    for sent_rows, sent_labels in zip(rows, labels):
        if len(sent_rows) != len(sent_labels):
            raise AlignmentError("sentence length mismatch between rows and labels")
    injected_labels = canonical_label_order(injected_labels)
    X = _flatten(rows, injected_labels)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no tokens in training data")
    flat_labels = [s for sent in labels for s in sent]
    Y = np.zeros((len(flat_labels), len(chain)), dtype=np.float64)
    for i, label_set in enumerate(flat_labels):
        for j, lab in enumerate(chain):
            if lab in label_set:
                Y[i, j] = 1.0

    stages: list[RandomForestBinary] = []
    for j in range(len(chain)):
        Xj = np.hstack([X, Y[:, :j]]) if j else X
        stages.append(fit_forest(Xj, Y[:, j], n_trees=n_trees, seed=seed,
                                 stage=j))
    return LcModel(labels=tuple(chain), stages=stages, base_dim=X.shape[1],
                   injected_labels=injected_labels, n_trees=n_trees, seed=seed)


def _predict_matrix(m: LcModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Returns (bool predictions, vote fractions), both (n, n_stages)."""
    if X.shape[1] != m.base_dim:
        raise FeatureShapeMismatch(m.base_dim, X.shape[1])
    n = X.shape[0]
    preds = np.zeros((n, len(m.stages)), dtype=bool)
    fracs = np.zeros((n, len(m.stages)), dtype=np.float64)
    for j, stage in enumerate(m.stages):
        Xj = np.hstack([X, preds[:, :j].astype(np.float64)]) if j else X
        votes = stage.votes(Xj)
        preds[:, j] = votes * 2 > stage.n_trees
        fracs[:, j] = votes / float(stage.n_trees)
    return preds, fracs


def predict_lc_scores(m: LcModel, rows: Sequence[Sequence[TokenFeatureRow]]
                      ) -> tuple[list[list[set[CodeLabel]]], list[np.ndarray]]:
    """Label sets plus per-stage vote fractions, grouped like the input."""
    results: list[list[set[CodeLabel]]] = []
    fractions: list[np.ndarray] = []
    lengths = [len(sent) for sent in rows]
    X = _flatten(rows, m.injected_labels)
    if X.shape[0] == 0:
        return [[] for _ in rows], [np.zeros((0, len(m.stages))) for _ in rows]
    preds, fracs = _predict_matrix(m, X)
    pos = 0
    for n in lengths:
        sent_sets = []
        for i in range(pos, pos + n):
            sent_sets.append({lab for j, lab in enumerate(m.labels)
                              if preds[i, j]})
        results.append(sent_sets)
        fractions.append(fracs[pos:pos + n])
        pos += n
    return results, fractions


def predict_lc(m: LcModel, rows: Sequence[Sequence[TokenFeatureRow]]
               ) -> list[list[set[CodeLabel]]]:
    return predict_lc_scores(m, rows)[0]
