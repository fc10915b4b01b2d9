"""Constant-step gradient, stochastic gradient and cyclic incremental gradient iterations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .objective import FiniteSumObjective, as_point
from .rng import make_rng

SGD = "sgd"
GD = "gd"
CYCLIC_IG = "cyclic-ig"
METHODS = (SGD, GD, CYCLIC_IG)


@dataclass(frozen=True)
class StepConfig:
    alpha: float
    iterations: int
    seed: int = 0
    x0: np.ndarray | None = None

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"step size must be positive and finite, got {self.alpha}")
        if self.iterations < 0:
            raise ValueError("iteration budget must be non-negative")


@dataclass(eq=False)
class Trajectory:
    """Per-iteration records for k = 0..K of one run."""

    method: str
    values: np.ndarray
    gaps: np.ndarray
    grad_norms: np.ndarray
    dists: np.ndarray
    final: np.ndarray
    indices: list = field(default_factory=list)

    @property
    def k(self) -> np.ndarray:
        return np.arange(self.values.shape[0])

    def __len__(self):
        return self.values.shape[0]


def _check_alpha(alpha):
    if not alpha > 0:
        raise ValueError("step size must be positive")


def gd_step(obj: FiniteSumObjective, x, alpha: float) -> np.ndarray:
    _check_alpha(alpha)
    return x - alpha * obj.grad(x)


def sgd_step(obj: FiniteSumObjective, x, alpha: float, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """One stochastic step with i drawn uniformly (with replacement) from ``rng``."""
    _check_alpha(alpha)
    i = int(rng.integers(obj.n_components))
    return x - alpha * obj.component_grad(i, x), i


def cyclic_ig_step(obj: FiniteSumObjective, x, alpha: float, cursor: int) -> tuple[np.ndarray, int]:
    _check_alpha(alpha)
    if not 0 <= cursor < obj.n_components:
        raise ValueError(f"cursor {cursor} outside [0, {obj.n_components})")
    return x - alpha * obj.component_grad(cursor, x), (cursor + 1) % obj.n_components


def exact_expected_one_step(obj: FiniteSumObjective, x, alpha: float) -> float:
    """(1/N) sum_i f(x - alpha f_i'(x)): E[f(x+)] over the uniform index, by enumeration."""
    _check_alpha(alpha)
    x = as_point(x, obj.dim)
    G = obj.component_grads(x)
    return float(np.mean([obj.value(x - alpha * g) for g in G]))


def run(method: str, obj: FiniteSumObjective, config: StepConfig, x_star, f_star: float) -> Trajectory:
    """Iterate ``method`` for ``config.iterations`` steps, recording gap statistics.

    Raises DivergenceError at the first iteration whose value, gradient or
    iterate is non-finite; the error carries the gaps recorded before it.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    K = config.iterations
    x_star = as_point(x_star, obj.dim)
    x = np.zeros(obj.dim) if config.x0 is None else as_point(config.x0, obj.dim)
    values = np.empty(K + 1)
    grad_norms = np.empty(K + 1)
    dists = np.empty(K + 1)
    indices = []
    rng = make_rng(config.seed) if method == SGD else None
    cursor = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K + 1):
            v = obj.value(x)
            g = obj.grad(x)
            values[k] = v
            grad_norms[k] = math.sqrt(g @ g)
            d = x - x_star
            dists[k] = math.sqrt(d @ d)
            if not (np.isfinite(v) and np.isfinite(grad_norms[k]) and np.isfinite(dists[k])):
                raise DivergenceError(method, k, partial=values[:k] - f_star)
            if k == K:
                break
            if method == GD:
                x = x - config.alpha * g
            elif method == SGD:
                x, i = sgd_step(obj, x, config.alpha, rng)
                indices.append(i)
            else:
                indices.append(cursor)
                x, cursor = cyclic_ig_step(obj, x, config.alpha, cursor)
    return Trajectory(method, values, values - f_star, grad_norms, dists, x, indices)
