"""Pure-numpy backend for linear-chain Viterbi decoding."""
from __future__ import annotations

import numpy as np


def viterbi(emit: np.ndarray, trans: np.ndarray, init: np.ndarray,
            final: np.ndarray) -> tuple[np.ndarray, float]:
    """Maximum-score tag path.

    emit: (n, T) per-position tag scores, trans: (T, T) ordered-pair scores,
    init/final: (T,) boundary scores.  Ties resolve to the lowest tag index
    (first occurrence), matching the numba backend bit for bit.
    """
    n, T = emit.shape
    back = np.zeros((n, T), dtype=np.int64)
    dp = init + emit[0]
    for t in range(1, n):
        cand = dp[:, None] + trans          # prev tag x next tag
        back[t] = np.argmax(cand, axis=0)
        dp = cand[back[t], np.arange(T)] + emit[t]
    dp = dp + final
    last = int(np.argmax(dp))
    score = float(dp[last])
    path = np.zeros(n, dtype=np.int64)
    path[n - 1] = last
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, score
