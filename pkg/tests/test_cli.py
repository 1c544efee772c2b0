from __future__ import annotations

import json
from pathlib import Path

import pytest

from biaslens.cli import main
from biaslens.corpus import load_corpus, save_corpus
from biaslens.review.store import DecisionStore
from biaslens.synthetic import synthetic_corpus

FAST = ["--buckets", "400", "--emb-epochs", "1", "--trees", "5",
        "--pnoc-iters", "5", "--osc-epochs", "2"]


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    save_corpus(synthetic_corpus(25, seed=51), path)
    return path


def test_embed_command(tmp_path, corpus_file):
    out = tmp_path / "emb"
    code = main(["embed", "--corpus", str(corpus_file), "--out", str(out),
                 "--epochs", "1", "--buckets", "300"])
    assert code == 0
    assert (out / "embeddings.bin").exists()
    assert json.loads((out / "config.json").read_text())["command"] == "embed"


def test_crossval_writes_run_dir(tmp_path, corpus_file):
    out = tmp_path / "run"
    code = main(["crossval", "--corpus", str(corpus_file), "--out", str(out),
                 "--variant", "c2", "--seed", "22", *FAST])
    assert code == 0
    for name in ("manifest.json", "folds.json", "predictions.jsonl",
                 "metrics.json", "config.json"):
        assert (out / name).exists(), name


def test_crossval_refuses_existing_out(tmp_path, corpus_file):
    out = tmp_path / "run"
    out.mkdir()
    code = main(["crossval", "--corpus", str(corpus_file), "--out", str(out),
                 *FAST])
    assert code == 1


def test_crossval_deterministic_byte_identical(tmp_path, corpus_file):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert main(["crossval", "--corpus", str(corpus_file), "--out",
                     str(out), "--variant", "baseline", "--seed", "22",
                     *FAST]) == 0
        outs.append(out)
    for fname in ("predictions.jsonl", "metrics.json", "folds.json",
                  "manifest.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_no_partial_outputs_on_failure(tmp_path, corpus_file):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{broken\n")
    out = tmp_path / "never"
    code = main(["crossval", "--corpus", str(bad), "--out", str(out), *FAST])
    assert code == 1
    assert not out.exists()
    assert not list(tmp_path.glob(".never*"))


def test_train_then_predict(tmp_path, corpus_file):
    model = tmp_path / "model"
    assert main(["train", "--corpus", str(corpus_file), "--out", str(model),
                 "--variant", "c2", *FAST]) == 0
    out = tmp_path / "preds"
    assert main(["predict", "--corpus", str(corpus_file), "--model",
                 str(model), "--out", str(out)]) == 0
    lines = (out / "predictions.jsonl").read_text().strip().splitlines()
    assert lines and all(json.loads(l)["source"] == "model:c2" for l in lines)


def test_evaluate_identical_files_all_ones(tmp_path, corpus_file, capsys):
    code = main(["evaluate", str(corpus_file), str(corpus_file)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["macro"] == {"precision": 1.0, "recall": 1.0, "f1": 1.0}
    assert payload["micro"]["f1"] == 1.0


def test_evaluate_run_predictions_against_gold(tmp_path, corpus_file, capsys):
    run = tmp_path / "run"
    assert main(["crossval", "--corpus", str(corpus_file), "--out", str(run),
                 "--variant", "c2", *FAST]) == 0
    assert main(["evaluate", str(run / "predictions.jsonl"),
                 str(corpus_file), "--out", str(tmp_path / "m")]) == 0
    metrics = json.loads((tmp_path / "m" / "metrics.json").read_text())
    assert "macro" in metrics and "conventions" in metrics


def test_iaa_three_files(tmp_path, capsys):
    corpus = synthetic_corpus(10, seed=52)
    paths = []
    for name in ("a", "b", "c"):
        p = tmp_path / f"{name}.jsonl"
        save_corpus(corpus, p)
        paths.append(str(p))
    assert main(["iaa", *paths]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["pairs"] == 3
    assert payload["macro"]["f1"] == 1.0


def test_iaa_requires_two_files(tmp_path, corpus_file):
    assert main(["iaa", str(corpus_file)]) == 1


def test_dashboard_command(tmp_path, corpus_file):
    run = tmp_path / "run"
    assert main(["crossval", "--corpus", str(corpus_file), "--out", str(run),
                 "--variant", "c2", *FAST]) == 0
    out = tmp_path / "dash"
    assert main(["dashboard", "--run", str(run), "--corpus",
                 str(corpus_file), "--out", str(out), "--top-n", "5"]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"rankings_Omission.csv", "rankings_Stereotype.csv",
            "languages.csv", "breakdown.json", "quality.json",
            "breakdown.svg", "words.svg"} <= names


def test_review_export_merges_accepted(tmp_path, corpus_file):
    corpus = load_corpus(corpus_file)
    d = corpus[0]
    log = tmp_path / "decisions.jsonl"
    store = DecisionStore(log)
    store.append(d.id, 0, len(d.text), "Omission", "accept", "", "sam")
    store.append(d.id, 0, len(d.text), "Stereotype", "reject", "", "sam")
    out = tmp_path / "augmented.jsonl"
    assert main(["review-export", "--corpus", str(corpus_file),
                 "--decisions", str(log), "--out", str(out)]) == 0
    merged = load_corpus(out)
    assert len(merged) == len(corpus)
    added = set(merged[0].annotations) - set(d.annotations)
    assert {(s.label.value, s.source) for s in added} == {
        ("Omission", "coder:sam")}


def test_unknown_label_in_evaluate_is_validation_error(corpus_file):
    assert main(["evaluate", str(corpus_file), str(corpus_file),
                 "--labels", "NotALabel"]) == 1


def test_missing_file_is_validation_error(tmp_path):
    assert main(["crossval", "--corpus", str(tmp_path / "nope.jsonl"),
                 "--out", str(tmp_path / "o")]) == 1
