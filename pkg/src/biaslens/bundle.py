"""ModelBundle persistence: one directory per trained pipeline.

Layout: manifest.json (algorithms, hyperparameters, seeds, feature layout,
training-corpus hash, degenerate-stage flags) plus per-model weight files
(embeddings.bin, tfidf.json, lc.npz, pnoc.npz, osc.npz).  Loading restores
predictions bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cascade import CascadeSpec, FoldModels, TrainedPipeline, Variant, osc_injected_labels
from .classifiers.crf import PnocModel
from .classifiers.forest import LcModel, RandomForestBinary
from .classifiers.sgd import LinearBinarySvm, OscModel
from .corpus import CodeLabel
from .features import (
    load_embeddings, load_tfidf, save_embeddings, save_tfidf, token_feature_names,
)


def _labels(values) -> tuple[CodeLabel, ...]:
    return tuple(CodeLabel(v) for v in values)


def save_lc(m: LcModel, path: str | Path) -> None:
    cfg = {
        "labels": [l.value for l in m.labels],
        "base_dim": m.base_dim,
        "injected_labels": [l.value for l in m.injected_labels],
        "n_trees": m.n_trees,
        "seed": m.seed,
        "constants": [s.constant for s in m.stages],
        "n_features": [s.n_features for s in m.stages],
    }
    arrays = {"config": np.array(json.dumps(cfg))}
    for i, stage in enumerate(m.stages):
        if stage.constant is not None:
            continue
        arrays[f"s{i}_features"] = stage.features
        arrays[f"s{i}_thresholds"] = stage.thresholds
        arrays[f"s{i}_lefts"] = stage.lefts
        arrays[f"s{i}_rights"] = stage.rights
        arrays[f"s{i}_leaf_class"] = stage.leaf_class
        arrays[f"s{i}_tree_offsets"] = stage.tree_offsets
    np.savez(path, **arrays)


def load_lc(path: str | Path) -> LcModel:
    data = np.load(path, allow_pickle=False)
    cfg = json.loads(str(data["config"]))
    stages = []
    for i, constant in enumerate(cfg["constants"]):
        if constant is not None:
            stages.append(RandomForestBinary(
                n_trees=cfg["n_trees"], n_features=cfg["n_features"][i],
                constant=constant))
        else:
            stages.append(RandomForestBinary(
                n_trees=cfg["n_trees"], n_features=cfg["n_features"][i],
                features=data[f"s{i}_features"],
                thresholds=data[f"s{i}_thresholds"],
                lefts=data[f"s{i}_lefts"], rights=data[f"s{i}_rights"],
                leaf_class=data[f"s{i}_leaf_class"],
                tree_offsets=data[f"s{i}_tree_offsets"]))
    return LcModel(labels=_labels(cfg["labels"]), stages=stages,
                   base_dim=cfg["base_dim"],
                   injected_labels=_labels(cfg["injected_labels"]),
                   n_trees=cfg["n_trees"], seed=cfg["seed"])


def save_pnoc(m: PnocModel, path: str | Path) -> None:
    cfg = {"tags": list(m.tags), "feature_dim": m.feature_dim,
           "variance": m.variance, "max_iterations": m.max_iterations,
           "epochs_run": m.epochs_run,
           "injected_labels": [l.value for l in m.injected_labels]}
    np.savez(path, config=np.array(json.dumps(cfg)), mu=m.mu, sigma=m.sigma)


def load_pnoc(path: str | Path) -> PnocModel:
    data = np.load(path, allow_pickle=False)
    cfg = json.loads(str(data["config"]))
    return PnocModel(tags=tuple(cfg["tags"]), feature_dim=cfg["feature_dim"],
                     mu=data["mu"], sigma=data["sigma"],
                     variance=cfg["variance"],
                     max_iterations=cfg["max_iterations"],
                     epochs_run=cfg["epochs_run"],
                     injected_labels=_labels(cfg["injected_labels"]))


def save_osc(m: OscModel, path: str | Path) -> None:
    cfg = {"labels": [l.value for l in m.labels], "n_features": m.n_features,
           "alpha": m.alpha, "epochs": m.epochs, "seed": m.seed,
           "objective": {l.value: v for l, v in m.objective.items()},
           "svms": {l.value: {"intercept": m.svms[l].intercept,
                              "t": m.svms[l].t,
                              "constant": m.svms[l].constant}
                    for l in m.labels}}
    arrays = {"config": np.array(json.dumps(cfg))}
    for label in m.labels:
        arrays[f"w_{label.value}"] = m.svms[label].w
    np.savez(path, **arrays)


def load_osc(path: str | Path) -> OscModel:
    data = np.load(path, allow_pickle=False)
    cfg = json.loads(str(data["config"]))
    labels = _labels(cfg["labels"])
    svms = {}
    for label in labels:
        meta = cfg["svms"][label.value]
        svms[label] = LinearBinarySvm(w=data[f"w_{label.value}"],
                                      intercept=meta["intercept"],
                                      t=meta["t"], constant=meta["constant"])
    return OscModel(labels=labels, svms=svms, n_features=cfg["n_features"],
                    alpha=cfg["alpha"], epochs=cfg["epochs"], seed=cfg["seed"],
                    objective={CodeLabel(k): v
                               for k, v in cfg["objective"].items()})


def _bundle_manifest(pipe: TrainedPipeline) -> dict:
    spec = pipe.spec
    models = pipe.models
    layout: dict = {}
    if models.lc is not None:
        layout["lc"] = token_feature_names(spec.embedding.dim,
                                           models.lc.injected_labels)
    if models.pnoc is not None:
        layout["pnoc"] = token_feature_names(spec.embedding.dim,
                                             models.pnoc.injected_labels)
    if models.osc is not None:
        layout["osc"] = {
            "tfidf_terms": len(pipe.tfidf.vocabulary),
            "injected_labels": [l.value for l in
                                osc_injected_labels(spec.variant)],
        }
    return {
        "spec": spec.to_dict(),
        "algorithms": {
            "lc": "classifier chain of random forests",
            "pnoc": "linear-chain CRF trained with AROW",
            "osc": "one-vs-rest linear SVMs (SGD, hinge loss)",
            "embeddings": "subword skip-gram with negative sampling",
        },
        "seeds": {"global": spec.seed},
        "feature_layout": layout,
        "training_corpus_hash": pipe.corpus_hash,
        "degenerate_stages": models.degenerate_flags(),
        "pnoc_epochs_run": (models.pnoc.epochs_run
                            if models.pnoc is not None else None),
    }


def save_bundle(pipe: TrainedPipeline, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(_bundle_manifest(pipe), fh, ensure_ascii=False, indent=2,
                  sort_keys=True)
        fh.write("\n")
    save_embeddings(pipe.emb, out / "embeddings.bin")
    save_tfidf(pipe.tfidf, out / "tfidf.json")
    if pipe.models.lc is not None:
        save_lc(pipe.models.lc, out / "lc.npz")
    if pipe.models.pnoc is not None:
        save_pnoc(pipe.models.pnoc, out / "pnoc.npz")
    if pipe.models.osc is not None:
        save_osc(pipe.models.osc, out / "osc.npz")


def load_bundle(bundle_dir: str | Path) -> TrainedPipeline:
    path = Path(bundle_dir)
    with open(path / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    raw = dict(manifest["spec"])
    from .cascade import EmbeddingConfig, LcConfig, OscConfig, PnocConfig
    spec = CascadeSpec(
        variant=Variant(raw["variant"]), seed=raw["seed"],
        policy=raw["policy"], embedding=EmbeddingConfig(**raw["embedding"]),
        lc=LcConfig(**raw["lc"]), pnoc=PnocConfig(**raw["pnoc"]),
        osc=OscConfig(**raw["osc"]))
    models = FoldModels()
    if (path / "lc.npz").exists():
        models.lc = load_lc(path / "lc.npz")
    if (path / "pnoc.npz").exists():
        models.pnoc = load_pnoc(path / "pnoc.npz")
    if (path / "osc.npz").exists():
        models.osc = load_osc(path / "osc.npz")
    return TrainedPipeline(
        spec=spec, emb=load_embeddings(path / "embeddings.bin"),
        tfidf=load_tfidf(path / "tfidf.json"), models=models,
        corpus_hash=manifest["training_corpus_hash"])
