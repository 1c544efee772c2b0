"""Numba backend for the decision-tree kernels.

Mirrors forest_numpy bit for bit: the cost formula uses the same elementwise
float64 operations and the scan keeps the first best candidate in
(feature, split position) order.
"""
from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def best_split_binary(Xs: np.ndarray, y: np.ndarray
                      ) -> tuple[int, float, float]:
    n, k = Xs.shape
    if n < 2:
        return -1, 0.0, np.inf
    best_cost = np.inf
    best_col = -1
    best_thr = 0.0
    nf = float(n)
    for j in range(k):
        col = Xs[:, j].copy()
        order = np.argsort(col, kind="mergesort")
        pos_left = 0.0
        pos_total = 0.0
        for i in range(n):
            pos_total += y[order[i]]
        for i in range(n - 1):
            pos_left += y[order[i]]
            lo = col[order[i]]
            hi = col[order[i + 1]]
            if not (hi > lo):
                continue
            n_left = float(i + 1)
            n_right = nf - n_left
            pl = pos_left / n_left
            ql = 1.0 - pl
            gini_l = 1.0 - pl * pl - ql * ql
            pr = (pos_total - pos_left) / n_right
            qr = 1.0 - pr
            gini_r = 1.0 - pr * pr - qr * qr
            cost = (n_left * gini_l + n_right * gini_r) / nf
            if cost < best_cost:
                best_cost = cost
                best_col = j
                thr = lo + (hi - lo) / 2.0
                if not (lo <= thr < hi):
                    thr = lo
                best_thr = thr
    if best_col < 0:
        return -1, 0.0, np.inf
    return best_col, best_thr, best_cost


@nb.njit(cache=True)
def forest_votes(X: np.ndarray, features: np.ndarray, thresholds: np.ndarray,
                 lefts: np.ndarray, rights: np.ndarray, leaf_class: np.ndarray,
                 tree_offsets: np.ndarray) -> np.ndarray:
    m = X.shape[0]
    votes = np.zeros(m, dtype=np.int64)
    n_trees = len(tree_offsets) - 1
    for t in range(n_trees):
        root = tree_offsets[t]
        for s in range(m):
            node = root
            while features[node] >= 0:
                if X[s, features[node]] <= thresholds[node]:
                    node = lefts[node]
                else:
                    node = rights[node]
            votes[s] += leaf_class[node]
    return votes
