"""Radial basis probabilistic network classifier.

Topology: input layer of N_F group frequencies, one pattern unit per training
sample (N_S, radial response around that sample's frequency vector), a summation
layer with one unit per candidate author (N_G), and a weighted maximum
probability selector. The summation weights are fit by ridge-regularized least
squares; refinement applies plain gradient steps so a gate can accept or discard
the result.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from .lexicon import FeatureVector, GroupLexicon, count_groups, tokenize
from .neural import BandwidthSchedule, DimensionError, KernelSpec, kernel_eval

RIDGE_EPS = 1e-6


class ModelError(ValueError):
    """Invalid model construction or training input."""


class SnapshotIncompatibleError(ModelError):
    """Model and lexicon disagree on the feature dimension."""


@dataclass(frozen=True)
class RBPNNModel:
    """Immutable trained classifier snapshot.

    Training and refinement return new snapshots; snapshot_id is a content hash
    so identical parameters always share an id."""

    n_features: int
    n_samples: int
    n_authors: int
    centroids: np.ndarray          # (N_S, N_F)
    beta: float
    summation_weights: np.ndarray  # (N_S, N_G)
    selector_weights: np.ndarray   # (N_G,)
    kernel: KernelSpec
    train_features: np.ndarray     # (N_S, N_F) frequencies the model was built from
    train_labels: np.ndarray       # (N_S,) author ids
    lexicon_version: int = 0
    snapshot_id: str = ""

    def __post_init__(self):
        if self.centroids.shape != (self.n_samples, self.n_features):
            raise DimensionError("centroid matrix shape mismatch")
        if self.summation_weights.shape != (self.n_samples, self.n_authors):
            raise DimensionError("summation weight shape mismatch")
        if self.selector_weights.shape != (self.n_authors,):
            raise DimensionError("selector weight shape mismatch")
        if not self.beta > 0:
            raise ModelError("beta must be > 0")
        if not np.all(self.selector_weights > 0):
            raise ModelError("selector weights must be positive")


@dataclass(frozen=True)
class Attribution:
    sample_id: str
    scores: np.ndarray       # normalized probabilities, sum 1
    selected_author: int
    margin: float            # top1 - top2 score


@dataclass(frozen=True)
class EvaluationRecord:
    """Per-sample deviance y - y_tilde plus summary rates.

    error_matrix holds the probabilistic deviance (components in [-1, 1]);
    boolean_matrix the post-selector encoding: 0 correct, -1 false positive,
    +1 missed."""

    error_matrix: np.ndarray
    boolean_matrix: np.ndarray
    selected: np.ndarray
    accuracy: float
    missed_rate: float
    false_positive_rate: float


def _content_id(centroids, beta, weights, selector, kernel, train_x, train_y, lexicon_version) -> str:
    h = hashlib.sha256()
    for arr in (centroids, weights, selector, train_x, train_y.astype(np.int64)):
        h.update(np.ascontiguousarray(arr).tobytes())
    meta = {
        "beta": beta,
        "kind": kernel.kind,
        "spread": kernel.spread,
        "dimension": kernel.dimension,
        "c": kernel.schedule.c,
        "alpha": kernel.schedule.alpha,
        "lexicon_version": lexicon_version,
    }
    h.update(json.dumps(meta, sort_keys=True).encode())
    return h.hexdigest()[:16]


def _with_id(model: RBPNNModel) -> RBPNNModel:
    sid = _content_id(
        model.centroids,
        model.beta,
        model.summation_weights,
        model.selector_weights,
        model.kernel,
        model.train_features,
        model.train_labels,
        model.lexicon_version,
    )
    return replace(model, snapshot_id=sid)


def _as_frequency_matrix(samples) -> tuple[np.ndarray, np.ndarray]:
    """Stack (FeatureVector | array, author_id) pairs into X, y."""
    rows = []
    labels = []
    for fv, author in samples:
        vec = fv.frequencies if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
        rows.append(np.asarray(vec, dtype=float))
        labels.append(int(author))
    lengths = {len(r) for r in rows}
    if len(lengths) > 1:
        raise DimensionError(f"inconsistent feature vector lengths: {sorted(lengths)}")
    return np.vstack(rows), np.asarray(labels, dtype=int)


def default_beta(X: np.ndarray) -> float:
    """Median pairwise distance between training vectors; 1.0 when degenerate."""
    n = len(X)
    if n < 2:
        return 1.0
    diffs = X[:, None, :] - X[None, :, :]
    dists = np.linalg.norm(diffs, axis=2)[np.triu_indices(n, k=1)]
    med = float(np.median(dists))
    return med if med > 0 else 1.0


def build_model(
    training,
    beta: float | None = None,
    kernel: KernelSpec | None = None,
    lexicon_version: int = 0,
) -> RBPNNModel:
    """Build and fit a classifier from (feature vector, author id) pairs.

    One pattern unit is centered on each training sample; the summation weights
    are then fit by train_output_weights."""
    X, y = _as_frequency_matrix(training)
    authors = np.unique(y)
    n_authors = int(authors.max()) + 1 if len(authors) else 0
    if n_authors < 2:
        raise ModelError("N_G >= 2 required: need at least two authors")
    missing = [a for a in range(n_authors) if a not in set(authors.tolist())]
    if missing:
        raise ModelError(f"authors with zero samples: {missing}")
    if beta is None:
        beta = default_beta(X)
    if kernel is None:
        kernel = KernelSpec(kind="gaussian", dimension=X.shape[1], schedule=BandwidthSchedule())
    n_s, n_f = X.shape
    model = RBPNNModel(
        n_features=n_f,
        n_samples=n_s,
        n_authors=n_authors,
        centroids=X.copy(),
        beta=float(beta),
        summation_weights=np.zeros((n_s, n_authors)),
        selector_weights=np.ones(n_authors),
        kernel=kernel,
        train_features=X.copy(),
        train_labels=y.copy(),
        lexicon_version=lexicon_version,
    )
    return train_output_weights(model)


def pattern_layer(model: RBPNNModel, v) -> np.ndarray:
    """Radial response of every pattern unit: kernel(||v - centroid_j|| / beta)."""
    vec = v.frequencies if isinstance(v, FeatureVector) else np.asarray(v, dtype=float)
    if vec.shape != (model.n_features,):
        raise DimensionError(f"input length {vec.shape} != ({model.n_features},)")
    r = np.linalg.norm(vec[None, :] - model.centroids, axis=1) / model.beta
    return kernel_eval(model.kernel, r)


def _pattern_matrix(model: RBPNNModel, X: np.ndarray) -> np.ndarray:
    diffs = X[:, None, :] - model.centroids[None, :, :]
    r = np.linalg.norm(diffs, axis=2) / model.beta
    return kernel_eval(model.kernel, r)


def summation_layer(model: RBPNNModel, x1) -> np.ndarray:
    x1 = np.asarray(x1, dtype=float)
    if x1.shape != (model.n_samples,):
        raise DimensionError(f"pattern vector length {x1.shape} != ({model.n_samples},)")
    return x1 @ model.summation_weights


def select(model: RBPNNModel, x2, sample_id: str = "") -> Attribution:
    """Weighted maximum probability selection: clamp negative weighted sums to
    zero, normalize to a probability vector (uniform when everything is zero),
    pick the argmax with ties going to the lowest author index."""
    x2 = np.asarray(x2, dtype=float)
    if x2.shape != (model.n_authors,):
        raise DimensionError(f"summation vector length {x2.shape} != ({model.n_authors},)")
    s = np.clip(model.selector_weights * x2, 0.0, None)
    total = s.sum()
    if total > 0:
        scores = s / total
    else:
        scores = np.full(model.n_authors, 1.0 / model.n_authors)
    selected = int(np.argmax(scores))
    top2 = np.partition(scores, -2)[-2] if model.n_authors >= 2 else 0.0
    return Attribution(
        sample_id=sample_id,
        scores=scores,
        selected_author=selected,
        margin=float(scores[selected] - top2),
    )


def train_output_weights(model: RBPNNModel, training=None) -> RBPNNModel:
    """Fit summation weights by ridge-regularized least squares against one-hot
    author targets; selector weights are reset to 1. Ridge keeps rank-deficient
    pattern matrices (duplicate samples) solvable."""
    if training is not None:
        X, y = _as_frequency_matrix(training)
        model = replace(
            model,
            n_samples=len(X),
            n_features=X.shape[1],
            centroids=X.copy(),
            train_features=X.copy(),
            train_labels=y.copy(),
            summation_weights=np.zeros((len(X), model.n_authors)),
        )
    X, y = model.train_features, model.train_labels
    phi = _pattern_matrix(model, X)
    Y = np.eye(model.n_authors)[y]
    lhs = phi.T @ phi + RIDGE_EPS * np.eye(model.n_samples)
    try:
        W = np.linalg.solve(lhs, phi.T @ Y)
    except np.linalg.LinAlgError as exc:
        raise ModelError(f"summation-weight solve failed: {exc}") from exc
    if not np.all(np.isfinite(W)):
        raise ModelError("summation-weight solve produced non-finite values")
    return _with_id(replace(model, summation_weights=W, selector_weights=np.ones(model.n_authors)))


def classify(model: RBPNNModel, lexicon: GroupLexicon, raw_text, sample_id: str = "") -> Attribution:
    """Full pipeline on raw text with a read-only lexicon."""
    if lexicon.n_groups != model.n_features:
        raise SnapshotIncompatibleError(
            f"lexicon has {lexicon.n_groups} groups, model expects {model.n_features}"
        )
    fv, _ = count_groups(tokenize(raw_text, sample_id), lexicon)
    return classify_features(model, fv, sample_id)


def classify_features(model: RBPNNModel, fv, sample_id: str = "") -> Attribution:
    vec = fv.frequencies if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
    if not np.any(vec):
        # no matched words: nothing to attribute, report uniform scores
        return Attribution(
            sample_id=sample_id,
            scores=np.full(model.n_authors, 1.0 / model.n_authors),
            selected_author=0,
            margin=0.0,
        )
    x1 = pattern_layer(model, fv)
    x2 = summation_layer(model, x1)
    return select(model, x2, sample_id)


def _training_loss(model: RBPNNModel, phi: np.ndarray, Y: np.ndarray) -> float:
    pred = (phi @ model.summation_weights) * model.selector_weights[None, :]
    return 0.5 * float(np.sum((pred - Y) ** 2))


def refine(model: RBPNNModel, new_samples, epochs: int = 5, step: float = 0.01) -> RBPNNModel:
    """Gradient refinement of summation and selector weights over the union of
    the stored training data and new samples. Returns a candidate snapshot; the
    caller's gate decides whether it replaces the serving one."""
    if epochs < 1:
        raise ModelError("epochs must be >= 1")
    X, y = model.train_features, model.train_labels
    if new_samples:
        Xn, yn = _as_frequency_matrix(new_samples)
        if Xn.shape[1] != model.n_features:
            raise DimensionError("new sample feature length mismatch")
        if np.any(yn < 0) or np.any(yn >= model.n_authors):
            raise ModelError("new sample author id out of range")
        X = np.vstack([X, Xn])
        y = np.concatenate([y, yn])
    phi = _pattern_matrix(model, X)
    Y = np.eye(model.n_authors)[y]
    W = model.summation_weights.copy()
    sel = model.selector_weights.copy()
    for _ in range(epochs):
        P = phi @ W
        resid = P * sel[None, :] - Y
        grad_w = phi.T @ (resid * sel[None, :])
        grad_sel = np.sum(resid * P, axis=0)
        W -= step * grad_w
        sel = np.maximum(sel - step * grad_sel, 1e-6)
    candidate = replace(
        model,
        summation_weights=W,
        selector_weights=sel,
        train_features=X.copy(),
        train_labels=y.copy(),
    )
    return _with_id(candidate)


def evaluate(model: RBPNNModel, labeled) -> EvaluationRecord:
    """Score a labeled set: probabilistic deviance matrix, accuracy, missed and
    false positive rates under the post-selector boolean encoding."""
    X, y = _as_frequency_matrix(labeled)
    if np.any(y < 0) or np.any(y >= model.n_authors):
        raise ModelError("author id out of range")
    n = len(X)
    Y = np.eye(model.n_authors)[y]
    scores = np.zeros((n, model.n_authors))
    selected = np.zeros(n, dtype=int)
    for i in range(n):
        attr = classify_features(model, X[i])
        scores[i] = attr.scores
        selected[i] = attr.selected_author
    e = Y - scores
    Yhat = np.eye(model.n_authors)[selected]
    e_bool = (Y - Yhat).astype(int)
    correct = selected == y
    accuracy = float(np.mean(correct)) if n else 0.0
    missed = float(np.mean(~correct)) if n else 0.0
    fp = float(np.sum(e_bool == -1)) / (n * model.n_authors) if n else 0.0
    return EvaluationRecord(
        error_matrix=e,
        boolean_matrix=e_bool,
        selected=selected,
        accuracy=accuracy,
        missed_rate=missed,
        false_positive_rate=fp,
    )
