"""Pure-numpy backend for the decision-tree kernels (binary labels)."""
from __future__ import annotations

import numpy as np


def best_split_binary(Xs: np.ndarray, y: np.ndarray
                      ) -> tuple[int, float, float]:
    """Best gini split over candidate feature columns.

    Xs: (n, k) float64 feature slice for one node, y: (n,) uint8 in {0, 1}.
    Returns (column index into Xs, threshold, weighted gini cost); column is
    -1 when no valid split exists.  Candidate thresholds are midpoints of
    consecutive distinct sorted values; ties keep the first candidate in
    (feature, split position) order.
    """
    n, k = Xs.shape
    if n < 2:
        return -1, 0.0, np.inf
    order = np.argsort(Xs, axis=0, kind="mergesort")
    xs = np.take_along_axis(Xs, order, axis=0)
    ys = y[order].astype(np.float64)

    pos_left = np.cumsum(ys, axis=0)[:-1]          # positives in left block
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    pos_total = pos_left[-1] + ys[-1]
    pos_right = pos_total - pos_left

    pl = pos_left / n_left
    ql = 1.0 - pl
    gini_l = 1.0 - pl * pl - ql * ql
    pr = pos_right / n_right
    qr = 1.0 - pr
    gini_r = 1.0 - pr * pr - qr * qr
    cost = (n_left * gini_l + n_right * gini_r) / n

    valid = xs[1:] > xs[:-1]
    cost = np.where(valid, cost, np.inf)

    flat = cost.T.ravel()                          # feature-major scan order
    best = int(np.argmin(flat))
    best_cost = float(flat[best])
    if not np.isfinite(best_cost):
        return -1, 0.0, np.inf
    col, split = divmod(best, n - 1)
    lo = xs[split, col]
    hi = xs[split + 1, col]
    thr = lo + (hi - lo) / 2.0
    if not (lo <= thr < hi):                       # midpoint rounded onto hi
        thr = lo
    return int(col), float(thr), best_cost


def forest_votes(X: np.ndarray, features: np.ndarray, thresholds: np.ndarray,
                 lefts: np.ndarray, rights: np.ndarray, leaf_class: np.ndarray,
                 tree_offsets: np.ndarray) -> np.ndarray:
    """Sum of per-tree leaf classes for each sample (positive vote count).

    Trees are stored flattened: node index ranges per tree come from
    tree_offsets; features[i] == -1 marks a leaf with class leaf_class[i].
    """
    m = X.shape[0]
    votes = np.zeros(m, dtype=np.int64)
    for t in range(len(tree_offsets) - 1):
        root = tree_offsets[t]
        ptr = np.full(m, root, dtype=np.int64)
        while True:
            feat = features[ptr]
            inner = feat >= 0
            if not inner.any():
                break
            idx = np.flatnonzero(inner)
            p = ptr[idx]
            go_left = X[idx, feat[idx]] <= thresholds[p]
            ptr[idx] = np.where(go_left, lefts[p], rights[p])
        votes += leaf_class[ptr]
    return votes
