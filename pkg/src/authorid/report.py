"""Evaluation reporting: delimited exports plus rendered figures.

The boolean performance matrix uses the same encoding as the score plots the
classifier is judged by: gray 0 for a correct slot, black -1 for a false
positive, white +1 for a miss.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .rbpnn import EvaluationRecord


def write_error_matrix_tsv(path, record: EvaluationRecord, sample_ids=None) -> None:
    """Per-sample deviance matrix, one row per sample, tab separated."""
    e = record.error_matrix
    n, n_authors = e.shape
    ids = sample_ids or [f"sample{i:04d}" for i in range(n)]
    lines = ["sample_id\t" + "\t".join(f"author{a}" for a in range(n_authors))]
    for sid, row in zip(ids, e):
        lines.append(sid + "\t" + "\t".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_tsv(path, record: EvaluationRecord) -> None:
    lines = [
        "metric\tvalue",
        f"accuracy\t{record.accuracy!r}",
        f"missed_rate\t{record.missed_rate!r}",
        f"false_positive_rate\t{record.false_positive_rate!r}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_performance_matrix(path, record: EvaluationRecord) -> None:
    """Boolean performance grid: samples on x, authors on y."""
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.imshow(
        record.boolean_matrix.T,
        cmap="gray",
        vmin=-1,
        vmax=1,
        aspect="auto",
        interpolation="nearest",
    )
    ax.set_xlabel("sample")
    ax.set_ylabel("author")
    ax.set_title("post-selector performance (black: false positive, white: miss)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_deviance_matrix(path, record: EvaluationRecord) -> None:
    """Probabilistic deviance grid (pre-selector confidence errors)."""
    fig, ax = plt.subplots(figsize=(8, 3))
    im = ax.imshow(
        record.error_matrix.T,
        cmap="gray",
        vmin=-1,
        vmax=1,
        aspect="auto",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label="y - score")
    ax.set_xlabel("sample")
    ax.set_ylabel("author")
    ax.set_title("probabilistic deviance")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(out_dir, record: EvaluationRecord, sample_ids=None) -> dict:
    """Write the delimited exports and figures; returns the produced paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "error_matrix_tsv": out / "error_matrix.tsv",
        "summary_tsv": out / "summary.tsv",
        "performance_png": out / "performance_matrix.png",
        "deviance_png": out / "deviance_matrix.png",
    }
    write_error_matrix_tsv(paths["error_matrix_tsv"], record, sample_ids)
    write_summary_tsv(paths["summary_tsv"], record)
    render_performance_matrix(paths["performance_png"], record)
    render_deviance_matrix(paths["deviance_png"], record)
    return {k: str(v) for k, v in paths.items()}
