#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py [--repeat 5]

Workloads mirror the shapes the pipeline produces on a mid-size corpus.
The numba backend is warmed once before timing so JIT compilation is not
counted.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from biaslens.kernels import (
    NUMBA_ENABLED, crf_numpy, forest_numpy, sgd_numpy, sgns_numpy,
)

if NUMBA_ENABLED:
    from biaslens.kernels import crf_numba, forest_numba, sgd_numba, sgns_numba


def time_call(fn, *args, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_best_split(rng):
    Xs = np.ascontiguousarray(rng.normal(size=(4000, 10)))
    y = rng.integers(0, 2, size=4000).astype(np.uint8)
    return ("best_split_binary (4000x10)",
            (forest_numpy.best_split_binary, Xs, y),
            (forest_numba.best_split_binary, Xs, y) if NUMBA_ENABLED else None)


def bench_forest_votes(rng):
    from biaslens.classifiers.forest import fit_forest
    X = rng.normal(size=(2000, 30))
    y = (X[:, 0] > 0).astype(int)
    f = fit_forest(X, y, n_trees=50, seed=22)
    probe = np.ascontiguousarray(rng.normal(size=(5000, 30)))
    args = (probe, f.features, f.thresholds, f.lefts, f.rights,
            f.leaf_class, f.tree_offsets)
    return ("forest_votes (50 trees x 5000 rows)",
            (forest_numpy.forest_votes, *args),
            (forest_numba.forest_votes, *args) if NUMBA_ENABLED else None)


def bench_viterbi(rng):
    emit = np.ascontiguousarray(rng.normal(size=(40, 11)))
    trans = np.ascontiguousarray(rng.normal(size=(11, 11)))
    init = np.ascontiguousarray(rng.normal(size=11))
    final = np.ascontiguousarray(rng.normal(size=11))

    def run_np():
        for _ in range(200):
            crf_numpy.viterbi(emit, trans, init, final)

    def run_nb():
        for _ in range(200):
            crf_numba.viterbi(emit, trans, init, final)

    return ("viterbi (11 tags x 40 tokens, x200)", (run_np,),
            (run_nb,) if NUMBA_ENABLED else None)


def bench_sgns(rng):
    V, B, dim, n = 500, 2000, 100, 400
    ids = rng.integers(0, V, size=n).astype(np.int32)
    offsets = np.arange(0, 4 * (V + 1), 4, dtype=np.int64)
    flat = rng.integers(0, B, size=4 * V).astype(np.int32)
    reduced = rng.integers(1, 6, size=n).astype(np.int32)
    pairs = sum(min(n, i + int(reduced[i]) + 1) - max(0, i - int(reduced[i])) - 1
                for i in range(n))
    negatives = rng.integers(0, V, size=pairs * 5).astype(np.int32)
    alphas = np.full(n, 0.025)

    def fresh():
        r = np.random.default_rng(0)
        return ((r.random((V, dim), dtype=np.float32) - 0.5) / dim,
                (r.random((B, dim), dtype=np.float32) - 0.5) / dim,
                np.zeros((V, dim), dtype=np.float32))

    def run(impl):
        vw, vg, vo = fresh()
        impl(vw, vg, vo, ids, flat, offsets, reduced, negatives, alphas, 5)

    return ("sgns_sentence (400 tokens, 5 negatives)",
            (run, sgns_numpy.sgns_sentence),
            (run, sgns_numba.sgns_sentence) if NUMBA_ENABLED else None)


def bench_hinge(rng):
    import scipy.sparse as sp
    X = sp.random(400, 3000, density=0.02, random_state=0, format="csr")
    X.data[:] = rng.random(X.nnz)
    y = np.where(rng.random(400) < 0.5, 1.0, -1.0)
    order = rng.permutation(400).astype(np.int64)
    indices = X.indices.astype(np.int64)
    indptr = X.indptr.astype(np.int64)

    def run(impl):
        w = np.zeros(3000)
        impl(X.data, indices, indptr, y, order, w, 0.0, 1e-4, 1000.0, 0)

    return ("hinge_epoch (400x3000, 2% dense)",
            (run, sgd_numpy.hinge_epoch),
            (run, sgd_numba.hinge_epoch) if NUMBA_ENABLED else None)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(42)

    benches = [bench_best_split(rng), bench_forest_votes(rng),
               bench_viterbi(rng), bench_sgns(rng), bench_hinge(rng)]

    print(f"{'kernel':42s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, np_call, nb_call in benches:
        if nb_call is not None:
            nb_call[0](*nb_call[1:])  # warm the JIT
        t_np = time_call(np_call[0], *np_call[1:], repeat=args.repeat)
        if nb_call is None:
            print(f"{name:42s} {t_np * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")
            continue
        t_nb = time_call(nb_call[0], *nb_call[1:], repeat=args.repeat)
        print(f"{name:42s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms "
              f"{t_np / t_nb:7.1f}x")
    if not NUMBA_ENABLED:
        print("\nnumba backend unavailable or disabled (BIASLENS_NUMBA=0);"
              " numpy fallback timed alone.")


if __name__ == "__main__":
    main()
