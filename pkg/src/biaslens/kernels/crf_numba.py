"""Numba backend for linear-chain Viterbi decoding."""
from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def viterbi(emit: np.ndarray, trans: np.ndarray, init: np.ndarray,
            final: np.ndarray) -> tuple[np.ndarray, float]:
    n, T = emit.shape
    back = np.zeros((n, T), dtype=np.int64)
    dp = np.empty(T, dtype=np.float64)
    for j in range(T):
        dp[j] = init[j] + emit[0, j]
    new = np.empty(T, dtype=np.float64)
    for t in range(1, n):
        for j in range(T):
            best = dp[0] + trans[0, j]
            arg = 0
            for i in range(1, T):
                v = dp[i] + trans[i, j]
                if v > best:
                    best = v
                    arg = i
            back[t, j] = arg
            new[j] = best + emit[t, j]
        dp[:] = new
    best = dp[0] + final[0]
    last = 0
    for j in range(1, T):
        v = dp[j] + final[j]
        if v > best:
            best = v
            last = j
    path = np.zeros(n, dtype=np.int64)
    path[n - 1] = last
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, best
