"""Operator command line.

All commands support `--format record` for stable machine-readable JSON output
and a `--seed` flag fixing every stochastic choice.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import lexicon as lx
from . import rbpnn
from .engine import Engine, EngineError
from .neural import BandwidthSchedule, KernelSpec, check_parzen_conditions
from .report import write_report
from .store import load_model_file, save_model_file


def _emit(ctx, payload: dict, text_lines) -> None:
    if ctx.obj["format"] == "record":
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            click.echo(line)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
@click.option("--format", "fmt", type=click.Choice(["text", "record"]), default="text", help="Output format.")
@click.option("--seed", type=int, default=0, help="Seed for all stochastic choices.")
@click.pass_context
def main(ctx, fmt, seed):
    """Authorship attribution toolkit: ingest, train, classify, evaluate, serve."""
    ctx.ensure_object(dict)
    ctx.obj["format"] = fmt
    ctx.obj["seed"] = seed


@main.command()
@click.option("--data", type=click.Path(), default="data", help="Store directory.")
@click.option("--dir", "src_dir", type=click.Path(exists=True), required=True, help="Directory of .txt files to load.")
@click.option("--split", type=click.Choice(["train", "validation", "unlabeled"]), default="train")
@click.option("--author", type=int, default=None, help="Author id for every file (or per-file <id>_ prefix).")
@click.pass_context
def ingest(ctx, data, src_dir, split, author):
    """Bulk-load text files into the sample database.

    Files named like `3_speech.txt` carry their author id in the prefix when
    --author is not given."""
    engine = Engine(data, seed=ctx.obj["seed"])
    loaded = []
    try:
        for path in sorted(Path(src_dir).glob("*.txt")):
            author_id = author
            if author_id is None and "_" in path.stem:
                prefix = path.stem.split("_", 1)[0]
                if prefix.isdigit():
                    author_id = int(prefix)
            if author_id is None and split != "unlabeled":
                _fail(f"{path}: no author id (use --author or an <id>_ filename prefix)")
            sid = engine.ingest_text(path.read_text(encoding="utf-8"), author_id=author_id, split=split)
            loaded.append({"sample_id": sid, "file": path.name, "author_id": author_id})
    except (EngineError, OSError) as exc:
        _fail(str(exc))
    _emit(ctx, {"ingested": loaded, "split": split}, [f"ingested {len(loaded)} samples into split {split}"])


@main.command()
@click.option("--data", type=click.Path(), default="data", help="Store directory.")
@click.option("--groups", type=click.Path(exists=True), required=True, help="Group database file.")
@click.option("--beta", type=float, default=None, help="Kernel spread (default: median pairwise distance).")
@click.option("--out", type=click.Path(), default=None, help="Also write the snapshot to this file.")
@click.pass_context
def train(ctx, data, groups, beta, out):
    """Build and fit the classifier from the ingested train split."""
    engine = Engine(data, seed=ctx.obj["seed"])
    try:
        engine.load_group_db(groups)
        model = engine.train_initial(beta=beta)
    except (EngineError, lx.LexiconError, rbpnn.ModelError) as exc:
        _fail(str(exc))
    if out:
        save_model_file(model, out)
    payload = {
        "snapshot_id": model.snapshot_id,
        "n_features": model.n_features,
        "n_samples": model.n_samples,
        "n_authors": model.n_authors,
        "beta": model.beta,
    }
    _emit(
        ctx,
        payload,
        [
            f"trained snapshot {model.snapshot_id}",
            f"N_F={model.n_features} N_S={model.n_samples} N_G={model.n_authors} beta={model.beta:.6g}",
        ],
    )


@main.command()
@click.option("--snapshot", type=click.Path(exists=True), required=True, help="Snapshot file from train --out.")
@click.option("--groups", type=click.Path(exists=True), required=True, help="Group database the model was trained with.")
@click.option("--text", "text_path", type=click.Path(exists=True), required=True, help="Text file to classify.")
@click.pass_context
def classify(ctx, snapshot, groups, text_path):
    """Classify one text and print the normalized author scores."""
    try:
        model = load_model_file(snapshot)
        lexicon = lx.load_group_db(groups)
        raw = Path(text_path).read_text(encoding="utf-8")
        attribution = rbpnn.classify(model, lexicon, raw, Path(text_path).stem)
    except (rbpnn.ModelError, lx.LexiconError, OSError) as exc:
        _fail(str(exc))
    payload = {
        "sample_id": attribution.sample_id,
        "scores": [float(s) for s in attribution.scores],
        "selected_author": attribution.selected_author,
        "margin": attribution.margin,
        "low_confidence": attribution.margin == 0.0,
    }
    lines = [f"selected author: {attribution.selected_author} (margin {attribution.margin:.4f})"]
    lines += [f"  author {i}: {s:.4f}" for i, s in enumerate(attribution.scores)]
    if attribution.margin == 0.0:
        lines.append("warning: uniform scores, low confidence")
    _emit(ctx, payload, lines)


@main.command()
@click.option("--data", type=click.Path(), default="data", help="Store directory.")
@click.option("--snapshot", type=click.Path(exists=True), default=None, help="Snapshot file (default: serving snapshot).")
@click.option("--split", type=click.Choice(["train", "validation"]), default="validation")
@click.option("--out-dir", type=click.Path(), default=None, help="Write the deviance matrix export and figures here.")
@click.pass_context
def evaluate(ctx, data, snapshot, split, out_dir):
    """Evaluate a snapshot on a stored split; optionally export matrix + figures."""
    engine = Engine(data, seed=ctx.obj["seed"])
    try:
        model = load_model_file(snapshot) if snapshot else engine.model
        if model is None:
            _fail("no snapshot given and no serving model in the store")
        labeled = engine._featurized_split(split)
        if not labeled:
            _fail(f"no samples in split {split!r}")
        record = rbpnn.evaluate(model, labeled)
    except (EngineError, rbpnn.ModelError, lx.LexiconError) as exc:
        _fail(str(exc))
    payload = {
        "split": split,
        "n_samples": len(labeled),
        "accuracy": record.accuracy,
        "missed_rate": record.missed_rate,
        "false_positive_rate": record.false_positive_rate,
    }
    if out_dir:
        sample_ids = [s.sample_id for s in engine.store.list_samples(split)]
        payload["report"] = write_report(out_dir, record, sample_ids)
    _emit(
        ctx,
        payload,
        [
            f"split={split} samples={len(labeled)}",
            f"accuracy={record.accuracy:.4f} missed_rate={record.missed_rate:.4f} "
            f"false_positive_rate={record.false_positive_rate:.4f}",
        ]
        + ([f"report written to {out_dir}"] if out_dir else []),
    )


@main.command("parzen-check")
@click.option("--kernel", type=click.Choice(["gaussian", "exponential_pnn"]), default="gaussian")
@click.option("--spread", type=float, default=1.0)
@click.option("--dimension", type=int, default=1)
@click.option("--c", "c", type=float, default=1.0, help="Bandwidth scale.")
@click.option("--alpha", type=float, default=0.5, help="Bandwidth decay exponent.")
@click.option("--extent", type=float, default=8.0, help="Quadrature grid extent.")
@click.pass_context
def parzen_check(ctx, kernel, spread, dimension, c, alpha, extent):
    """Verify the window-function conditions for a kernel configuration."""
    try:
        spec = KernelSpec(kind=kernel, spread=spread, dimension=dimension, schedule=BandwidthSchedule(c, alpha))
        report = check_parzen_conditions(spec, grid_extent=extent)
    except ValueError as exc:
        _fail(str(exc))
    payload = {
        "kernel": kernel,
        "dimension": dimension,
        "integral_of_K": report.integral_of_K,
        "sup_K": report.sup_K,
        "tail_decay_ok": report.tail_decay_ok,
        "h_n_to_zero": report.h_n_to_zero,
        "n_h_n_to_inf": report.n_h_n_to_inf,
        "all_ok": report.all_ok(),
    }
    _emit(
        ctx,
        payload,
        [
            f"integral of K over R^{dimension}: {report.integral_of_K:.8f}",
            f"sup K: {report.sup_K:.6f}",
            f"tail decay ok: {report.tail_decay_ok}",
            f"h_n -> 0: {report.h_n_to_zero}",
            f"n h_n -> inf: {report.n_h_n_to_inf}",
            f"all conditions: {'pass' if report.all_ok() else 'FAIL'}",
        ],
    )
    if not report.all_ok():
        sys.exit(1)


@main.command()
@click.option("--addr", default="127.0.0.1:8000", help="host:port to bind.")
@click.option("--data", type=click.Path(), default="data", help="Store directory.")
@click.pass_context
def serve(ctx, addr, data):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    host, _, port = addr.partition(":")
    engine = Engine(data, seed=ctx.obj["seed"])
    uvicorn.run(create_app(engine), host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":
    main()
