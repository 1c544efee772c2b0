from __future__ import annotations

import numpy as np
import pytest

from biaslens import kernels
from biaslens.classifiers import (
    arow_update, make_tags, predict_lc, predict_lc_scores, predict_osc,
    predict_pnoc, train_lc, train_osc, train_pnoc,
)
from biaslens.classifiers.forest import fit_forest
from biaslens.corpus import CodeLabel, LC_LABELS, OSC_LABELS
from biaslens.errors import EmptyTrainingSet, FeatureShapeMismatch
from biaslens.features.assemble import TokenFeatureRow
from oracles import brute_viterbi_max

GP, GR, GEN = LC_LABELS
OMIT, STEREO = OSC_LABELS


def rows_from_matrix(X: np.ndarray) -> list[list[TokenFeatureRow]]:
    """One sentence per matrix row-block: here a single sentence."""
    sent = []
    for i, x in enumerate(X):
        sent.append(TokenFeatureRow(embedding=np.asarray(x, dtype=np.float64),
                                    start_of_sentence=i == 0,
                                    end_of_sentence=i == len(X) - 1))
    return [sent]


def lexicon_data(n: int, seed: int, dim: int = 12):
    """Tokens whose feature vector first coordinate encodes the label."""
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 0.05, size=(n, dim))
    y = rng.integers(0, 2, size=n)
    X[:, 0] += y * 2.0
    labels = [{GP} if t else set() for t in y]
    return X, labels, y


# ------------------------------------------------------------ forest / LC

def test_forest_learns_separable_data():
    X, _, y = lexicon_data(400, seed=1)
    forest = fit_forest(X, y, n_trees=20, seed=22)
    acc = (forest.predict(X) == y.astype(bool)).mean()
    assert acc == 1.0


def test_forest_training_accuracy_beats_majority():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 8))
    y = (X[:, 0] + 0.3 * rng.normal(size=300) > 0).astype(int)
    forest = fit_forest(X, y, n_trees=30, seed=22)
    majority = max(y.mean(), 1 - y.mean())
    assert (forest.predict(X) == y.astype(bool)).mean() >= majority


def test_forest_degenerate_single_class_is_constant():
    X = np.random.default_rng(0).normal(size=(50, 4))
    forest = fit_forest(X, np.zeros(50), n_trees=10, seed=22)
    assert forest.constant == 0
    assert not forest.predict(X).any()


def test_lc_multilabel_token_can_carry_multiple_codes():
    rng = np.random.default_rng(3)
    X = rng.normal(0, 0.05, size=(200, 10))
    both = rng.integers(0, 2, size=200)
    X[:, 0] += both * 2.0
    labels = [{GR, GEN} if b else set() for b in both]
    model = train_lc(rows_from_matrix(X), [labels], seed=22, n_trees=15)
    hot = X[both == 1][:5]
    got = predict_lc(model, rows_from_matrix(hot))[0]
    assert all({GR, GEN} <= s for s in got)


def test_lc_deterministic_same_seed_same_predictions():
    X, labels, _ = lexicon_data(250, seed=4)
    m1 = train_lc(rows_from_matrix(X), [labels], seed=22, n_trees=10)
    m2 = train_lc(rows_from_matrix(X), [labels], seed=22, n_trees=10)
    probe = np.random.default_rng(9).normal(0, 1, size=(1000, X.shape[1]))
    p1 = predict_lc_scores(m1, rows_from_matrix(probe))
    p2 = predict_lc_scores(m2, rows_from_matrix(probe))
    assert p1[0] == p2[0]
    assert np.array_equal(p1[1][0], p2[1][0])


def test_lc_all_zero_rows_total_function():
    X, labels, _ = lexicon_data(100, seed=5)
    model = train_lc(rows_from_matrix(X), [labels], seed=22, n_trees=5)
    out = predict_lc(model, rows_from_matrix(np.zeros((3, X.shape[1]))))
    assert len(out[0]) == 3  # no exception, some constant answer


def test_lc_empty_input_empty_output():
    X, labels, _ = lexicon_data(100, seed=5)
    model = train_lc(rows_from_matrix(X), [labels], seed=22, n_trees=5)
    assert predict_lc(model, []) == []


def test_lc_feature_shape_mismatch():
    X, labels, _ = lexicon_data(100, seed=5)
    model = train_lc(rows_from_matrix(X), [labels], seed=22, n_trees=5)
    with pytest.raises(FeatureShapeMismatch):
        predict_lc(model, rows_from_matrix(np.zeros((2, 5))))


def test_lc_empty_training_rejected():
    with pytest.raises(EmptyTrainingSet):
        train_lc([], [], seed=22)


def test_forest_backends_agree():
    X, _, y = lexicon_data(150, seed=6)
    forest = fit_forest(X, y, n_trees=8, seed=22)
    probe = np.random.default_rng(1).normal(size=(60, X.shape[1]))
    votes_nb = kernels.forest_votes(
        np.ascontiguousarray(probe), forest.features, forest.thresholds,
        forest.lefts, forest.rights, forest.leaf_class, forest.tree_offsets)
    votes_np = kernels.forest_votes_np(
        np.ascontiguousarray(probe), forest.features, forest.thresholds,
        forest.lefts, forest.rights, forest.leaf_class, forest.tree_offsets)
    assert np.array_equal(votes_nb, votes_np)


def test_best_split_backends_bit_identical():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        k = int(rng.integers(1, 6))
        Xs = np.ascontiguousarray(rng.normal(size=(n, k)))
        if rng.random() < 0.3:
            Xs[:, 0] = Xs[0, 0]  # constant column
        y = rng.integers(0, 2, size=n).astype(np.uint8)
        a = kernels.best_split_binary_np(Xs, y)
        b = kernels.best_split_binary(Xs, y) if kernels.NUMBA_ENABLED else a
        assert a == b


# ------------------------------------------------------------ CRF / PNOC

def test_all_o_training_predicts_all_o():
    rng = np.random.default_rng(8)
    sents = [rng.normal(size=(5, 6)) for _ in range(10)]
    tags = [["O"] * 5 for _ in range(10)]
    model = train_pnoc(sents, tags)
    out, _ = predict_pnoc(model, sents)
    assert all(t == "O" for sent in out for t in sent)
    assert model.epochs_run == 1  # no updates in the first epoch


def test_zero_weight_model_emits_first_tag():
    model = train_pnoc([np.zeros((3, 4))], [["O", "O", "O"]])
    out, _ = predict_pnoc(model, [np.ones((4, 4))])
    assert out[0] == ["O"] * 4
    assert model.tags[0] == "O"


def test_transition_features_exist_for_all_pairs():
    model = train_pnoc([np.zeros((2, 3))], [["O", "O"]])
    T = model.n_tags
    assert T == 11  # O plus B/I for five person-name-and-occupation codes
    assert model.mu.shape == (T * 3 + T * T + 2 * T,)


def test_crf_learns_title_name_fixture():
    # "mrs <name>" => Feminine span; bare name => Unknown
    rng = np.random.default_rng(9)
    title = np.zeros(8); title[0] = 1.0
    name = np.zeros(8); name[1] = 1.0
    filler = np.zeros(8); filler[2] = 1.0
    sents, tags = [], []
    for _ in range(60):
        if rng.random() < 0.5:
            sents.append(np.vstack([filler, title, name, filler])
                         + rng.normal(0, 0.01, size=(4, 8)))
            tags.append(["O", "B-Feminine", "I-Feminine", "O"])
        else:
            sents.append(np.vstack([filler, name, filler])
                         + rng.normal(0, 0.01, size=(3, 8)))
            tags.append(["O", "B-Unknown", "O"])
    model = train_pnoc(sents, tags)
    got, _ = predict_pnoc(model, sents)
    assert got == tags


def test_sigma_entries_nonincreasing_and_positive():
    rng = np.random.default_rng(10)
    mu = np.zeros(40)
    sigma = np.ones(40)
    for _ in range(100):
        before = sigma.copy()
        delta = rng.normal(size=40) * (rng.random(40) < 0.3)
        arow_update(mu, sigma, delta, r=1.0)
        assert np.all(sigma <= before + 1e-15)
        assert np.all(sigma > 0)


def test_viterbi_matches_exhaustive_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(1, 7))
        T = int(rng.integers(2, 6))
        emit = rng.normal(size=(n, T))
        trans = rng.normal(size=(T, T))
        init = rng.normal(size=T)
        final = rng.normal(size=T)
        path, got = kernels.viterbi(
            np.ascontiguousarray(emit), np.ascontiguousarray(trans),
            np.ascontiguousarray(init), np.ascontiguousarray(final))
        want = brute_viterbi_max(emit, trans, init, final)
        assert got == pytest.approx(want, abs=1e-9)
        # the decoded path reproduces its own reported score
        s = init[path[0]] + final[path[-1]] + emit[np.arange(n), path].sum()
        s += trans[path[:-1], path[1:]].sum()
        assert s == pytest.approx(got, abs=1e-9)


def test_viterbi_backends_bit_identical():
    if not kernels.NUMBA_ENABLED:
        pytest.skip("numba backend not active")
    rng = np.random.default_rng(12)
    for _ in range(40):
        n = int(rng.integers(1, 9))
        T = int(rng.integers(2, 7))
        emit = np.ascontiguousarray(rng.normal(size=(n, T)))
        trans = np.ascontiguousarray(rng.normal(size=(T, T)))
        init = np.ascontiguousarray(rng.normal(size=T))
        final = np.ascontiguousarray(rng.normal(size=T))
        p1, s1 = kernels.viterbi(emit, trans, init, final)
        p2, s2 = kernels.viterbi_np(emit, trans, init, final)
        assert np.array_equal(p1, p2)
        assert s1 == s2


def test_predict_pnoc_empty_input():
    model = train_pnoc([np.zeros((2, 3))], [["O", "O"]])
    assert predict_pnoc(model, []) == ([], [])


# ------------------------------------------------------------ SGD / OSC

def doc_matrix(n: int, seed: int, dim: int = 30):
    import scipy.sparse as sp
    rng = np.random.default_rng(seed)
    X = rng.random((n, dim)) * (rng.random((n, dim)) < 0.2)
    y = rng.integers(0, 2, size=n)
    X[:, 0] = y * 1.0
    rows = sp.csr_matrix(X)
    labels = [{OMIT} if t else set() for t in y]
    return rows, labels, y


def test_osc_learns_keyword_fixture():
    X, labels, y = doc_matrix(300, seed=13)
    model = train_osc(X, labels, epochs=10, seed=22)
    pred, scores = predict_osc(model, X)
    got = np.array([OMIT in s for s in pred])
    assert (got == y.astype(bool)).mean() >= 0.99


def test_osc_label_absent_predicts_negative_and_is_flagged():
    X, labels, _ = doc_matrix(50, seed=14)
    model = train_osc(X, labels, epochs=3, seed=22)
    pred, _ = predict_osc(model, X)
    assert all(STEREO not in s for s in pred)
    assert model.degenerate_labels == {"Stereotype": 0}


def test_osc_objective_nonincreasing_epoch_averages():
    X, labels, _ = doc_matrix(200, seed=15)
    model = train_osc(X, labels, epochs=10, seed=22)
    history = model.objective[OMIT]
    assert len(history) == 10
    # single epochs may bounce (stochastic steps); the running average of
    # the epoch objectives must never increase, and the end beats the start
    running = np.cumsum(history) / np.arange(1, len(history) + 1)
    assert all(b <= a + 1e-9 for a, b in zip(running, running[1:]))
    assert history[-1] < history[0]


def test_osc_zero_vector_scores_equal_intercepts():
    import scipy.sparse as sp
    X, labels, _ = doc_matrix(80, seed=16)
    model = train_osc(X, labels, epochs=5, seed=22)
    zero = sp.csr_matrix((1, X.shape[1]))
    _, scores = predict_osc(model, zero)
    for label in OSC_LABELS:
        assert scores[0][label] == model.svms[label].intercept


def test_osc_scores_affine_in_features():
    import scipy.sparse as sp
    X, labels, _ = doc_matrix(80, seed=17)
    model = train_osc(X, labels, epochs=5, seed=22)
    v = sp.csr_matrix(np.random.default_rng(0).random((1, X.shape[1])))
    _, s1 = predict_osc(model, v)
    _, s3 = predict_osc(model, v * 3.0)
    for label in OSC_LABELS:
        b = model.svms[label].intercept
        assert s3[0][label] - b == pytest.approx(3 * (s1[0][label] - b),
                                                 rel=1e-12)


def test_osc_multilabel_both_positive():
    import scipy.sparse as sp
    rng = np.random.default_rng(18)
    X = rng.random((120, 10)) * 0.01
    y = rng.integers(0, 2, size=120)
    X[:, 0] = y
    X[:, 1] = y
    labels = [{OMIT, STEREO} if t else set() for t in y]
    model = train_osc(sp.csr_matrix(X), labels, epochs=10, seed=22)
    pred, _ = predict_osc(model, sp.csr_matrix(X[y == 1][:5]))
    assert all(s == {OMIT, STEREO} for s in pred)


def test_osc_deterministic():
    X, labels, _ = doc_matrix(100, seed=19)
    m1 = train_osc(X, labels, epochs=5, seed=22)
    m2 = train_osc(X, labels, epochs=5, seed=22)
    for label in OSC_LABELS:
        assert np.array_equal(m1.svms[label].w, m2.svms[label].w)
        assert m1.svms[label].intercept == m2.svms[label].intercept


def test_osc_empty_training_rejected():
    import scipy.sparse as sp
    with pytest.raises(EmptyTrainingSet):
        train_osc(sp.csr_matrix((0, 5)), [], epochs=2, seed=22)
