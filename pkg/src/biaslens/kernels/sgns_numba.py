"""Numba backend for skip-gram negative-sampling training."""
from __future__ import annotations

import math

import numba as nb
import numpy as np


@nb.njit(cache=True)
def sgns_sentence(vec_word: np.ndarray, vec_ngram: np.ndarray,
                  vec_out: np.ndarray, word_ids: np.ndarray,
                  ngrams_flat: np.ndarray, ngram_offsets: np.ndarray,
                  reduced_windows: np.ndarray, negatives: np.ndarray,
                  alphas: np.ndarray, n_negative: int) -> int:
    n = len(word_ids)
    dim = vec_word.shape[1]
    h = np.empty(dim, dtype=np.float32)
    grad_h = np.empty(dim, dtype=np.float32)
    pair = 0
    for i in range(n):
        w = int(word_ids[i])
        b = int(reduced_windows[i])
        g0 = int(ngram_offsets[w])
        g1 = int(ngram_offsets[w + 1])
        n_grams = g1 - g0
        inv_g = np.float32(1.0 / n_grams) if n_grams > 0 else np.float32(0.0)
        lo = i - b
        if lo < 0:
            lo = 0
        hi = i + b + 1
        if hi > n:
            hi = n
        for j in range(lo, hi):
            if j == i:
                continue
            for c in range(dim):
                h[c] = vec_word[w, c]
            if n_grams > 0:
                for gidx in range(g0, g1):
                    gi = ngrams_flat[gidx]
                    for c in range(dim):
                        h[c] += vec_ngram[gi, c] * inv_g
            target = int(word_ids[j])
            for c in range(dim):
                grad_h[c] = 0.0
            for d in range(n_negative + 1):
                if d == 0:
                    tgt = target
                    label = 1.0
                else:
                    tgt = int(negatives[pair * n_negative + d - 1])
                    if tgt == target:
                        continue
                    label = 0.0
                s = 0.0
                for c in range(dim):
                    s += h[c] * vec_out[tgt, c]
                if s > 30.0:
                    p = 1.0
                elif s < -30.0:
                    p = 0.0
                else:
                    p = 1.0 / (1.0 + math.exp(-s))
                g = np.float32((label - p) * alphas[i])
                for c in range(dim):
                    grad_h[c] += g * vec_out[tgt, c]
                    vec_out[tgt, c] += g * h[c]
            for c in range(dim):
                vec_word[w, c] += grad_h[c]
            if n_grams > 0:
                for gidx in range(g0, g1):
                    gi = ngrams_flat[gidx]
                    for c in range(dim):
                        vec_ngram[gi, c] += grad_h[c] * inv_g
            pair += 1
    return pair
