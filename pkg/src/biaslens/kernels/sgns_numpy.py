"""Pure-numpy backend for skip-gram negative-sampling training.

One call trains on one sentence.  All randomness (window reductions,
negative draws, learning rates) is generated by the caller so the kernel
itself is deterministic.
"""
from __future__ import annotations

import math

import numpy as np


def sgns_sentence(vec_word: np.ndarray, vec_ngram: np.ndarray,
                  vec_out: np.ndarray, word_ids: np.ndarray,
                  ngrams_flat: np.ndarray, ngram_offsets: np.ndarray,
                  reduced_windows: np.ndarray, negatives: np.ndarray,
                  alphas: np.ndarray, n_negative: int) -> int:
    """Updates the input (word + n-gram bucket) and output vectors in place.

    The input representation of a center word is its word vector plus the
    mean of its n-gram bucket vectors, matching lookup composition.
    negatives holds n_negative draws per (center, context) pair in scan
    order; a draw equal to the true context word is skipped, not redrawn.
    Returns the number of pairs consumed.
    """
    n = len(word_ids)
    pair = 0
    for i in range(n):
        w = int(word_ids[i])
        b = int(reduced_windows[i])
        g0, g1 = int(ngram_offsets[w]), int(ngram_offsets[w + 1])
        grams = ngrams_flat[g0:g1]
        inv_g = np.float32(1.0 / len(grams)) if len(grams) else np.float32(0.0)
        lo = max(0, i - b)
        hi = min(n, i + b + 1)
        for j in range(lo, hi):
            if j == i:
                continue
            if len(grams):
                h = vec_word[w] + vec_ngram[grams].sum(axis=0) * inv_g
            else:
                h = vec_word[w].copy()
            target = int(word_ids[j])
            grad_h = np.zeros_like(h)
            for d in range(n_negative + 1):
                if d == 0:
                    tgt = target
                    label = 1.0
                else:
                    tgt = int(negatives[pair * n_negative + d - 1])
                    if tgt == target:
                        continue
                    label = 0.0
                s = float(np.dot(h, vec_out[tgt]))
                if s > 30.0:
                    p = 1.0
                elif s < -30.0:
                    p = 0.0
                else:
                    p = 1.0 / (1.0 + math.exp(-s))
                g = np.float32((label - p) * alphas[i])
                grad_h += g * vec_out[tgt]
                vec_out[tgt] += g * h
            vec_word[w] += grad_h
            if len(grams):
                step = grad_h * inv_g
                for gi in grams:
                    vec_ngram[gi] += step
            pair += 1
    return pair
