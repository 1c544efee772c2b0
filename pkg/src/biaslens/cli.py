"""Operator command line.

Exit codes: 0 success, 1 validation error (bad arguments or input files),
2 runtime error.  Every command that produces artifacts builds them in a
temporary sibling directory and renames it into place, so an interrupted
run leaves nothing partial under --out; each output directory carries the
resolved configuration as config.json.  BIASLENS_LOG sets the log level.
"""
from __future__ import annotations

import contextlib
import json
import logging
import os
import shutil
import sys
from pathlib import Path

import click

from .bundle import load_bundle, save_bundle
from .cascade import (
    CascadeSpec, EmbeddingConfig, LcConfig, OscConfig, PnocConfig, Variant,
    load_predictions, prediction_span_map, predict_pipeline, run_cascade,
    train_pipeline, write_run,
)
from .corpus import (
    CodeLabel, load_corpus, load_folds, make_folds, save_corpus,
)
from .dashboard import build_dashboard, render
from .errors import BiaslensError, CorpusMismatch
from .evaluation import pairwise_iaa, score, spans_by_description, write_metrics
from .features import save_embeddings, train_embeddings
from .review.store import DecisionStore, merge_accepted

log = logging.getLogger("biaslens")


def _setup_logging() -> None:
    level = os.environ.get("BIASLENS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


@contextlib.contextmanager
def _atomic_dir(out: Path):
    """Build outputs in a temp sibling, rename into place on success."""
    out = Path(out)
    if out.exists():
        raise click.UsageError(f"output directory {out} already exists")
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.parent / f".{out.name}.tmp-{os.getpid()}"
    shutil.rmtree(tmp, ignore_errors=True)
    tmp.mkdir(parents=True)
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    os.rename(tmp, out)


def _write_config(directory: Path, config: dict) -> None:
    with open(directory / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _spec_from_options(variant: str, seed: int, policy: str, buckets: int,
                       emb_epochs: int, trees: int, pnoc_iters: int,
                       osc_epochs: int) -> CascadeSpec:
    return CascadeSpec(
        variant=Variant(variant), seed=seed, policy=policy,
        embedding=EmbeddingConfig(epochs=emb_epochs, buckets=buckets),
        lc=LcConfig(n_trees=trees),
        pnoc=PnocConfig(max_iterations=pnoc_iters),
        osc=OscConfig(epochs=osc_epochs))


_variant_opt = click.option("--variant", default="baseline",
                            type=click.Choice([v.value for v in Variant]),
                            show_default=True)
_seed_opt = click.option("--seed", default=22, show_default=True, type=int)
_policy_opt = click.option("--policy", default="same-training-folds",
                           type=click.Choice(["same-training-folds", "nested"]),
                           show_default=True)
_feature_opts = [
    click.option("--buckets", default=200_000, show_default=True, type=int,
                 help="embedding hash bucket count"),
    click.option("--emb-epochs", default=5, show_default=True, type=int),
    click.option("--trees", default=100, show_default=True, type=int,
                 help="random forest size per chain stage"),
    click.option("--pnoc-iters", default=100, show_default=True, type=int),
    click.option("--osc-epochs", default=10, show_default=True, type=int),
]


def _with(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
def cli() -> None:
    """Gendered-language classification pipeline for catalog metadata."""
    _setup_logging()


@cli.command()
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--dim", default=100, show_default=True, type=int)
@click.option("--window", default=5, show_default=True, type=int)
@click.option("--epochs", default=5, show_default=True, type=int)
@click.option("--negatives", default=5, show_default=True, type=int)
@click.option("--min-count", default=1, show_default=True, type=int)
@click.option("--buckets", default=200_000, show_default=True, type=int)
@_seed_opt
def embed(corpus_path: str, out_dir: str, dim: int, window: int, epochs: int,
          negatives: int, min_count: int, buckets: int, seed: int) -> None:
    """Train word embeddings on a corpus."""
    corpus = load_corpus(corpus_path)
    config = {"command": "embed", "corpus": corpus_path, "out": out_dir,
              "dim": dim, "window": window, "epochs": epochs,
              "negatives": negatives, "min_count": min_count,
              "buckets": buckets, "seed": seed}
    model = train_embeddings(corpus, dim=dim, window=window, epochs=epochs,
                             negatives=negatives, min_count=min_count,
                             seed=seed, buckets=buckets)
    with _atomic_dir(Path(out_dir)) as tmp:
        save_embeddings(model, tmp / "embeddings.bin")
        _write_config(tmp, config)
    click.echo(f"embeddings: {len(model.vocab)} words, dim {model.dim}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
@_variant_opt
@_seed_opt
@_with(_feature_opts)
def train(corpus_path: str, out_dir: str, variant: str, seed: int,
          buckets: int, emb_epochs: int, trees: int, pnoc_iters: int,
          osc_epochs: int) -> None:
    """Train a full-corpus model bundle for one cascade variant."""
    corpus = load_corpus(corpus_path)
    spec = _spec_from_options(variant, seed, "same-training-folds", buckets,
                              emb_epochs, trees, pnoc_iters, osc_epochs)
    pipe = train_pipeline(corpus, spec)
    config = {"command": "train", "corpus": corpus_path, "out": out_dir,
              "spec": spec.to_dict()}
    with _atomic_dir(Path(out_dir)) as tmp:
        save_bundle(pipe, tmp)
        _write_config(tmp, config)
    click.echo(f"bundle written to {out_dir}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
def predict(corpus_path: str, model_dir: str, out_dir: str) -> None:
    """Predict a corpus with a trained bundle."""
    corpus = load_corpus(corpus_path)
    pipe = load_bundle(model_dir)
    records = predict_pipeline(pipe, corpus)
    config = {"command": "predict", "corpus": corpus_path,
              "model": model_dir, "out": out_dir,
              "spec": pipe.spec.to_dict()}
    with _atomic_dir(Path(out_dir)) as tmp:
        with open(tmp / "predictions.jsonl", "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(rec.to_json() + "\n")
        _write_config(tmp, config)
    click.echo(f"{len(records)} predicted spans")


@cli.command()
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--folds", "n_folds", default=5, show_default=True, type=int)
@_variant_opt
@_seed_opt
@_policy_opt
@_with(_feature_opts)
def crossval(corpus_path: str, out_dir: str, n_folds: int, variant: str,
             seed: int, policy: str, buckets: int, emb_epochs: int,
             trees: int, pnoc_iters: int, osc_epochs: int) -> None:
    """Modified k-fold cross-validation: model codes for the whole corpus."""
    corpus = load_corpus(corpus_path)
    spec = _spec_from_options(variant, seed, policy, buckets, emb_epochs,
                              trees, pnoc_iters, osc_epochs)
    folds = make_folds(corpus, k=n_folds, seed=seed)
    run = run_cascade(corpus, spec, folds)
    config = {"command": "crossval", "corpus": corpus_path, "out": out_dir,
              "folds": n_folds, "spec": spec.to_dict()}
    with _atomic_dir(Path(out_dir)) as tmp:
        write_run(run, tmp)
        _write_config(tmp, config)
    click.echo(f"{len(run.predictions)} predicted spans across "
               f"{n_folds} folds; macro F1 {run.metrics.macro[2]:.3f}")


def _load_spans_file(path: str) -> dict:
    """A prediction file is either a corpus JSONL (records with
    annotations) or a flat span-record JSONL from a run directory."""
    with open(path, encoding="utf-8") as fh:
        first = ""
        for line in fh:
            if line.strip():
                first = line
                break
    if not first:
        return {}
    rec = json.loads(first)
    if "annotations" in rec or "text" in rec:
        return spans_by_description(load_corpus(path))
    return prediction_span_map(load_predictions(path))


@cli.command()
@click.argument("pred_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("gold_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=None, type=click.Path())
@click.option("--labels", default=None,
              help="comma-separated label subset (default: all)")
def evaluate(pred_path: str, gold_path: str, out_dir: str | None,
             labels: str | None) -> None:
    """Score a prediction file against a gold corpus (loose matching)."""
    gold = load_corpus(gold_path)
    pred_map = _load_spans_file(pred_path)
    for d in gold:
        pred_map.setdefault(d.id, [])
    if labels:
        try:
            selected = tuple(CodeLabel(x.strip()) for x in labels.split(","))
        except ValueError as exc:
            raise click.UsageError(f"unknown label in --labels: {exc}")
    else:
        selected = tuple(CodeLabel)
    report = score(pred_map, gold, labels=selected)
    payload = report.to_dict()
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
    if out_dir:
        config = {"command": "evaluate", "pred": pred_path,
                  "gold": gold_path, "out": out_dir,
                  "labels": [l.value for l in selected]}
        with _atomic_dir(Path(out_dir)) as tmp:
            write_metrics(report, tmp / "metrics.json")
            _write_config(tmp, config)


@cli.command()
@click.argument("annotation_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=None, type=click.Path())
@click.option("--labels", default=None)
def iaa(annotation_files: tuple[str, ...], out_dir: str | None,
        labels: str | None) -> None:
    """Pairwise inter-annotator agreement over two or more corpus files."""
    if len(annotation_files) < 2:
        raise click.UsageError("iaa needs at least two annotation files")
    sets = {}
    for path in annotation_files:
        name = Path(path).stem
        sets[name] = spans_by_description(load_corpus(path))
    selected = (tuple(CodeLabel(x.strip()) for x in labels.split(","))
                if labels else tuple(CodeLabel))
    report = pairwise_iaa(sets, labels=selected)
    payload = report.to_dict()
    payload["pairs"] = report.n_reports
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
    if out_dir:
        config = {"command": "iaa", "files": list(annotation_files),
                  "out": out_dir, "labels": [l.value for l in selected]}
        with _atomic_dir(Path(out_dir)) as tmp:
            with open(tmp / "iaa.json", "w", encoding="utf-8") as fh:
                json.dump(payload, fh, ensure_ascii=False, indent=2,
                          sort_keys=True)
                fh.write("\n")
            _write_config(tmp, config)


@cli.command()
@click.option("--run", "run_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--top-n", default=10, show_default=True, type=int)
def dashboard(run_dir: str, corpus_path: str, out_dir: str, top_n: int) -> None:
    """Render the gendered-language dashboard for a cascade run."""
    corpus = load_corpus(corpus_path)
    records = load_predictions(Path(run_dir) / "predictions.jsonl")
    pred_map = prediction_span_map(records, corpus)
    present = sorted({r.label for r in records}, key=list(CodeLabel).index)
    report = score(pred_map, corpus, labels=tuple(present)) if present else None
    data = build_dashboard(records, corpus, top_n=top_n, report=report)
    config = {"command": "dashboard", "run": run_dir, "corpus": corpus_path,
              "out": out_dir, "top_n": top_n}
    with _atomic_dir(Path(out_dir)) as tmp:
        render(data, tmp)
        _write_config(tmp, config)
    click.echo(f"dashboard written to {out_dir}")


@cli.command()
@click.option("--run", "run_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--listen", default="127.0.0.1:8800", show_default=True,
              help="host:port to bind")
@click.option("--decisions", "decisions_path", default=None,
              type=click.Path(dir_okay=False),
              help="decision log (default: <run>/decisions.jsonl)")
@click.option("--ui", "ui_dir", default=None,
              type=click.Path(file_okay=False),
              help="built frontend to mount at /ui")
def serve(run_dir: str, corpus_path: str, listen: str,
          decisions_path: str | None, ui_dir: str | None) -> None:
    """Serve the review workflow over HTTP."""
    import uvicorn

    from .review.service import create_app

    corpus = load_corpus(corpus_path)
    records = load_predictions(Path(run_dir) / "predictions.jsonl")
    store = DecisionStore(decisions_path
                          or str(Path(run_dir) / "decisions.jsonl"))
    app = create_app(corpus, records, store, ui_dir=ui_dir)
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--listen expects host:port, got {listen!r}")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


@cli.command("review-export")
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--decisions", "decisions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--policy", default="latest-accepted",
              type=click.Choice(["latest-accepted"]), show_default=True)
def review_export(corpus_path: str, decisions_path: str, out_path: str,
                  policy: str) -> None:
    """Merge accepted review decisions into an augmented corpus JSONL."""
    corpus = load_corpus(corpus_path)
    store = DecisionStore(decisions_path)
    merged = merge_accepted(store, corpus)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.parent / f".{out.name}.tmp-{os.getpid()}"
    save_corpus(merged, tmp)
    os.replace(tmp, out)
    n_added = sum(1 for d in store.latest_per_target().values()
                  if d.verdict == "accept")
    click.echo(f"augmented corpus with {n_added} accepted spans")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except (BiaslensError, FileNotFoundError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # anything else is a runtime failure
        log.exception("unhandled error")
        click.echo(f"runtime error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
