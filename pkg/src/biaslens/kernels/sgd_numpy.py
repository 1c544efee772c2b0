"""Pure-numpy backend for one epoch of hinge-loss SGD over CSR rows."""
from __future__ import annotations

import numpy as np


def hinge_epoch(data: np.ndarray, indices: np.ndarray, indptr: np.ndarray,
                y: np.ndarray, order: np.ndarray, w: np.ndarray,
                intercept: float, alpha: float, t0: float, t_start: int
                ) -> tuple[float, int]:
    """One pass over the samples listed in `order` (visit sequence).

    Step size 1/(alpha*(t0+t)); L2 shrink applied every step, the gradient
    step only on margin violations; the intercept is not regularized.
    Updates w in place and returns (intercept, next t).
    """
    t = t_start
    for pos in order:
        r0, r1 = indptr[pos], indptr[pos + 1]
        cols = indices[r0:r1]
        vals = data[r0:r1]
        score = intercept + float(np.dot(vals, w[cols]))
        eta = 1.0 / (alpha * (t0 + t))
        w *= 1.0 - eta * alpha
        if y[pos] * score < 1.0:
            step = eta * y[pos]
            w[cols] += step * vals
            intercept += step
        t += 1
    return intercept, t
