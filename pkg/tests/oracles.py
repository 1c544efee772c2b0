"""Independent reference implementations used to check the package.

Deliberately naive and structurally different from the production code:
plain nested loops, exhaustive enumeration, no shared helpers.
"""
from __future__ import annotations

import itertools

import numpy as np


def brute_loose_counts(pred: list[tuple[int, int, str]],
                       gold: list[tuple[int, int, str]],
                       label: str) -> dict[str, int]:
    """Loose-match counts for one description and label over (start, end,
    label) triples.  tp counts matched predicted spans, tp_gold matched
    gold spans, fp/fn the unmatched remainders."""
    def hits(a, b):
        return a[2] == label == b[2] and a[0] < b[1] and b[0] < a[1]

    ps = [p for p in pred if p[2] == label]
    gs = [g for g in gold if g[2] == label]
    tp = sum(1 for p in ps if any(hits(p, g) for g in gs))
    tp_gold = sum(1 for g in gs if any(hits(p, g) for p in ps))
    return {"tp": tp, "fp": len(ps) - tp, "tp_gold": tp_gold,
            "fn": len(gs) - tp_gold}


def brute_prf(tp: int, fp: int, tp_gold: int, fn: int
              ) -> tuple[float, float, float]:
    p = tp / (tp + fp) if (tp + fp) else 0.0
    r = tp_gold / (tp_gold + fn) if (tp_gold + fn) else 0.0
    f = 2 * p * r / (p + r) if (p + r) else 0.0
    return p, r, f


def brute_viterbi_max(emit: np.ndarray, trans: np.ndarray, init: np.ndarray,
                      final: np.ndarray) -> float:
    """Exhaustive maximum path score over all tag sequences."""
    n, n_tags = emit.shape
    best = -np.inf
    for path in itertools.product(range(n_tags), repeat=n):
        s = init[path[0]] + final[path[-1]]
        for i in range(n):
            s += emit[i, path[i]]
        for i in range(n - 1):
            s += trans[path[i], path[i + 1]]
        if s > best:
            best = s
    return float(best)


def brute_viterbi_max_vec(emit: np.ndarray, trans: np.ndarray,
                          init: np.ndarray, final: np.ndarray) -> float:
    """Exhaustive maximum over all T^n paths, enumerated as one array."""
    n, n_tags = emit.shape
    paths = np.indices((n_tags,) * n).reshape(n, -1)
    scores = init[paths[0]] + final[paths[-1]]
    for i in range(n):
        scores = scores + emit[i, paths[i]]
    for i in range(n - 1):
        scores = scores + trans[paths[i], paths[i + 1]]
    return float(scores.max())


def random_spans(rng: np.random.Generator, max_spans: int, labels: list[str],
                 text_len: int = 60) -> list[tuple[int, int, str]]:
    n = int(rng.integers(0, max_spans + 1))
    spans = []
    for _ in range(n):
        start = int(rng.integers(0, text_len - 1))
        end = int(rng.integers(start + 1, text_len + 1))
        spans.append((start, end, labels[int(rng.integers(0, len(labels)))]))
    return spans
