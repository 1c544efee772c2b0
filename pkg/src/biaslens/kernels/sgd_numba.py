"""Numba backend for one epoch of hinge-loss SGD over CSR rows."""
from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def hinge_epoch(data: np.ndarray, indices: np.ndarray, indptr: np.ndarray,
                y: np.ndarray, order: np.ndarray, w: np.ndarray,
                intercept: float, alpha: float, t0: float, t_start: int
                ) -> tuple[float, int]:
    t = t_start
    n_features = w.shape[0]
    for k in range(len(order)):
        pos = order[k]
        r0 = indptr[pos]
        r1 = indptr[pos + 1]
        score = intercept
        for r in range(r0, r1):
            score += data[r] * w[indices[r]]
        eta = 1.0 / (alpha * (t0 + t))
        shrink = 1.0 - eta * alpha
        for c in range(n_features):
            w[c] *= shrink
        if y[pos] * score < 1.0:
            step = eta * y[pos]
            for r in range(r0, r1):
                w[indices[r]] += step * data[r]
            intercept += step
        t += 1
    return intercept, t
