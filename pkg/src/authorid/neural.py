"""Shared neural primitives.

Radial window kernels with numeric validity checks for density estimation,
a Parzen window estimator, and a small dense feedforward network with
backpropagation (used by the adaptive critic).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

KERNEL_KINDS = ("gaussian", "exponential_pnn")
ACTIVATIONS = ("sigmoid", "tanh")


class DimensionError(ValueError):
    """Input shape does not match the declared layer/kernel dimension."""


@dataclass(frozen=True)
class BandwidthSchedule:
    """Power-law window width h_n = c * n**(-alpha).

    With c > 0 and 0 < alpha < 1 the width shrinks to zero while n*h_n grows
    without bound, which is what consistency of the window estimate needs."""

    c: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"bandwidth scale c must be > 0, got {self.c}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"bandwidth exponent alpha must be in (0,1), got {self.alpha}")

    def width(self, n: int) -> float:
        return self.c * float(n) ** (-self.alpha)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "gaussian"
    spread: float = 1.0
    dimension: int = 1
    schedule: BandwidthSchedule = BandwidthSchedule()

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.spread > 0:
            raise ValueError(f"spread must be > 0, got {self.spread}")
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")

    @property
    def sigma(self) -> float:
        # the gaussian profile is the unit-width special case
        return 1.0 if self.kind == "gaussian" else self.spread


def kernel_eval(spec: KernelSpec, r):
    """Unnormalized radial profile at distance r >= 0 (1.0 at the origin)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("kernel argument must be non-negative")
    return np.exp(-(r * r) / (2.0 * spec.sigma**2))


def kernel_density(spec: KernelSpec, r):
    """Radial profile scaled so its integral over d-dimensional space is 1."""
    norm = (2.0 * math.pi * spec.sigma**2) ** (spec.dimension / 2.0)
    return kernel_eval(spec, r) / norm


def parzen_estimate(samples, x, n_index: int, spec: KernelSpec) -> float:
    """Window density estimate at x: average of 1/h^d * K((x - x_i)/h) over the
    samples, with h taken from the bandwidth schedule at n_index."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if samples.size == 0:
        raise ValueError("parzen_estimate needs at least one sample")
    if n_index != len(samples):
        raise ValueError(f"n_index {n_index} != number of samples {len(samples)}")
    if samples.shape[1] != spec.dimension or len(x) != spec.dimension:
        raise DimensionError(
            f"samples/x must be {spec.dimension}-dimensional, got {samples.shape[1]}/{len(x)}"
        )
    h = spec.schedule.width(n_index)
    r = np.linalg.norm((x[None, :] - samples) / h, axis=1)
    return float(np.mean(kernel_density(spec, r)) / h**spec.dimension)


@dataclass(frozen=True)
class ParzenReport:
    integral_of_K: float
    sup_K: float
    tail_decay_ok: bool
    h_n_to_zero: bool
    n_h_n_to_inf: bool

    def all_ok(self, integral_tol: float = 1e-6) -> bool:
        return (
            abs(self.integral_of_K - 1.0) <= integral_tol
            and math.isfinite(self.sup_K)
            and self.tail_decay_ok
            and self.h_n_to_zero
            and self.n_h_n_to_inf
        )


def _sphere_surface(d: int) -> float:
    # |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def check_parzen_conditions(
    spec: KernelSpec,
    grid_extent: float = 8.0,
    n_max: int = 10_000,
    kernel_fn=None,
    n_points: int = 20_001,
) -> ParzenReport:
    """Numerically verify the window-function conditions for a radial kernel.

    Checks that the kernel integrates to 1 over d-dimensional space (radial
    trapezoid quadrature), has a finite supremum on the grid, and that
    |x| * K(|x|) decays to zero toward the grid boundary. The bandwidth limit
    conditions follow analytically from the power-law schedule. kernel_fn may
    override the spec's normalized radial profile."""
    if not grid_extent > 0:
        raise ValueError("grid_extent must be > 0")
    if n_max < 10:
        raise ValueError("n_max must be >= 10")
    d = spec.dimension
    f = kernel_fn if kernel_fn is not None else (lambda r: kernel_density(spec, r))
    rs = np.linspace(0.0, grid_extent, n_points)
    vals = np.asarray(f(rs), dtype=float)

    integral = _sphere_surface(d) * float(np.trapezoid(rs ** (d - 1) * vals, rs))
    sup_k = float(np.max(vals))

    # tail: r*K(r) must be (weakly) decreasing over the outer quarter of the
    # grid and essentially zero at the boundary
    t = rs * vals
    tail = t[3 * n_points // 4 :]
    tail_ok = bool(np.all(np.diff(tail) <= 1e-12) and t[-1] <= 1e-6 * (np.max(t) + 1e-300))

    h_first = spec.schedule.width(1)
    h_last = spec.schedule.width(n_max)
    h_to_zero = spec.schedule.alpha > 0 and h_last < h_first
    nh_to_inf = spec.schedule.alpha < 1 and n_max * h_last > 1 * h_first

    return ParzenReport(
        integral_of_K=integral,
        sup_K=sup_k,
        tail_decay_ok=tail_ok,
        h_n_to_zero=bool(h_to_zero),
        n_h_n_to_inf=bool(nh_to_inf),
    )


# --- dense feedforward network -------------------------------------------------

def _sigmoid(u):
    return 1.0 / (1.0 + np.exp(-u))


def _sigmoid_prime(u):
    s = _sigmoid(u)
    return s * (1.0 - s)


def _tanh_prime(u):
    return 1.0 - np.tanh(u) ** 2


_ACT = {"sigmoid": (_sigmoid, _sigmoid_prime), "tanh": (np.tanh, _tanh_prime)}


@dataclass(frozen=True)
class DenseNet:
    """Immutable fully connected net; each weight matrix carries a bias column.

    Updates return a new value, so snapshots of the net are free."""

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    activation: str = "sigmoid"
    learning_rate: float = 0.1

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise DimensionError("one weight matrix per layer transition required")
        for i, w in enumerate(self.weights):
            expect = (self.layer_sizes[i + 1], self.layer_sizes[i] + 1)
            if w.shape != expect:
                raise DimensionError(f"layer {i} weights {w.shape} != {expect}")
            if not np.all(np.isfinite(w)):
                raise ValueError(f"layer {i} weights contain non-finite values")


def make_net(
    layer_sizes,
    activation: str = "sigmoid",
    learning_rate: float = 0.1,
    seed: int = 0,
    scale: float = 0.5,
) -> DenseNet:
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in layer_sizes)
    weights = tuple(
        rng.normal(0.0, scale, size=(sizes[i + 1], sizes[i] + 1)) for i in range(len(sizes) - 1)
    )
    return DenseNet(sizes, weights, activation, learning_rate)


def ffnn_forward(net: DenseNet, x):
    """Forward pass; returns the output and the (activations, pre-activations)
    cache used by backprop."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.layer_sizes[0],):
        raise DimensionError(f"input shape {x.shape} != ({net.layer_sizes[0]},)")
    act, _ = _ACT[net.activation]
    activations = [x]
    preacts = []
    a = x
    for w in net.weights:
        u = w @ np.append(a, 1.0)
        preacts.append(u)
        a = act(u)
        activations.append(a)
    return a, (activations, preacts)


def _weight_gradients(net: DenseNet, x, xi):
    """Gradients of the loss 0.5*||xi||^2 where xi = output - target is supplied
    at the output layer."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (net.layer_sizes[-1],):
        raise DimensionError(f"error shape {xi.shape} != ({net.layer_sizes[-1]},)")
    _, (activations, preacts) = ffnn_forward(net, x)
    _, act_prime = _ACT[net.activation]
    grads = [None] * len(net.weights)
    delta = xi * act_prime(preacts[-1])
    for layer in range(len(net.weights) - 1, -1, -1):
        grads[layer] = np.outer(delta, np.append(activations[layer], 1.0))
        if layer > 0:
            delta = (net.weights[layer][:, :-1].T @ delta) * act_prime(preacts[layer - 1])
    return grads


def ffnn_backprop_step(net: DenseNet, x, xi) -> DenseNet:
    """One gradient-descent step at the net's learning rate against the supplied
    output error xi (= output - target). Returns the updated net."""
    grads = _weight_gradients(net, x, xi)
    new_w = tuple(w - net.learning_rate * g for w, g in zip(net.weights, grads))
    return replace(net, weights=new_w)


def gradient_check(net: DenseNet, x, target, step: float = 1e-5) -> float:
    """Compare backprop gradients against central finite differences of the
    squared-error loss over every weight; returns the worst relative error."""
    target = np.asarray(target, dtype=float)

    def loss(weights):
        probe = replace(net, weights=weights)
        out, _ = ffnn_forward(probe, x)
        return 0.5 * float(np.sum((out - target) ** 2))

    out, _ = ffnn_forward(net, x)
    grads = _weight_gradients(net, x, out - target)
    worst = 0.0
    for layer, g in enumerate(grads):
        for idx in np.ndindex(g.shape):
            w_plus = [w.copy() for w in net.weights]
            w_minus = [w.copy() for w in net.weights]
            w_plus[layer][idx] += step
            w_minus[layer][idx] -= step
            fd = (loss(tuple(w_plus)) - loss(tuple(w_minus))) / (2.0 * step)
            # floor keeps near-zero gradients from blowing up the ratio
            denom = max(abs(fd) + abs(g[idx]), 1e-6)
            worst = max(worst, abs(fd - g[idx]) / denom)
    return worst
