from __future__ import annotations

import json

import numpy as np
import pytest

from biaslens.bundle import load_bundle, save_bundle
from biaslens.cascade import Variant, predict_pipeline, train_pipeline
from biaslens.synthetic import synthetic_corpus
from conftest import tiny_spec


@pytest.fixture(scope="module", params=[Variant.BASELINE, Variant.C2])
def trained(request):
    corpus = synthetic_corpus(25, seed=31)
    pipe = train_pipeline(corpus, tiny_spec(request.param))
    return corpus, pipe


def test_bundle_round_trip_predictions_bit_exact(tmp_path, trained):
    corpus, pipe = trained
    before = predict_pipeline(pipe, corpus)
    out = tmp_path / "bundle"
    save_bundle(pipe, out)
    loaded = load_bundle(out)
    after = predict_pipeline(loaded, corpus)
    assert [r.to_json() for r in before] == [r.to_json() for r in after]


def test_bundle_manifest_contents(tmp_path, trained):
    corpus, pipe = trained
    out = tmp_path / "bundle"
    save_bundle(pipe, out)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["training_corpus_hash"] == pipe.corpus_hash
    assert manifest["spec"]["variant"] == pipe.spec.variant.value
    assert manifest["spec"]["seed"] == 22
    assert "feature_layout" in manifest
    layout = manifest["feature_layout"]
    if pipe.models.lc is not None:
        assert layout["lc"][-1 - len(pipe.models.lc.injected_labels)] == "bias"
    expected = {"manifest.json", "embeddings.bin", "tfidf.json"}
    assert expected <= {p.name for p in out.iterdir()}
