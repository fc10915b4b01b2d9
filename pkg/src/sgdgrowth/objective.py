"""Finite-sum objectives f(x) = (1/N) sum_i f_i(x) and gradient-error diagnostics.

Components are indexed from 0 to N - 1. Component functions are stored
unscaled; the averaging by 1/N happens here and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GrowthViolationError, NumericOverflowError

__all__ = [
    "FiniteSumObjective",
    "ScaledQuadraticObjective",
    "LeastSquaresObjective",
    "ConsistentLeastSquaresObjective",
    "FunctionListObjective",
    "GradientError",
    "GradientCheck",
    "as_point",
    "full_value",
    "full_gradient",
    "gradient_error",
    "error_second_moment",
    "growth_ratio",
    "default_stationarity_tol",
    "check_gradient",
]


def as_point(x, dim: int) -> np.ndarray:
    """Coerce ``x`` to a float64 vector of length ``dim``."""
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    if arr.shape[0] != dim:
        raise ValueError(f"point has dimension {arr.shape[0]}, objective has {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    return arr


class FiniteSumObjective:
    """Base class. Subclasses implement ``component_values`` and ``component_grads``.

    ``component_values(x)`` returns the length-N vector of f_i(x) and
    ``component_grads(x)`` the (N, P) matrix whose rows are f_i'(x). Every
    other evaluation is derived from those two.
    """

    n_components: int
    dim: int

    def component_values(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def component_grads(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def component_value(self, i: int, x: np.ndarray) -> float:
        return float(self.component_values(x)[self._index(i)])

    def component_grad(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.component_grads(x)[self._index(i)]

    def value(self, x: np.ndarray) -> float:
        return float(self.component_values(x).sum() / self.n_components)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.component_grads(x).sum(axis=0) / self.n_components

    def _index(self, i: int) -> int:
        if not 0 <= i < self.n_components:
            raise IndexError(f"component index {i} outside [0, {self.n_components})")
        return int(i)


class ScaledQuadraticObjective(FiniteSumObjective):
    """f_i(x) = (c_i / 2) ||x - x*||^2."""

    def __init__(self, curvatures, x_star):
        self.curvatures = np.asarray(curvatures, dtype=np.float64).reshape(-1)
        self.x_star = np.asarray(x_star, dtype=np.float64).reshape(-1)
        self.n_components = self.curvatures.shape[0]
        self.dim = self.x_star.shape[0]
        if self.n_components < 1 or self.dim < 1:
            raise ValueError("need at least one component and one dimension")
        self.mean_curvature = float(self.curvatures.sum() / self.n_components)

    def value(self, x):
        d = x - self.x_star
        return 0.5 * self.mean_curvature * float(d @ d)

    def grad(self, x):
        return self.mean_curvature * (x - self.x_star)

    def component_values(self, x):
        d = x - self.x_star
        return 0.5 * self.curvatures * float(d @ d)

    def component_grads(self, x):
        return np.outer(self.curvatures, x - self.x_star)

    def component_grad(self, i, x):
        return self.curvatures[self._index(i)] * (x - self.x_star)


class LeastSquaresObjective(FiniteSumObjective):
    """f_i(x) = (1/2) (a_i^T x - b_i)^2 for rows a_i of ``A``."""

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.b = np.asarray(b, dtype=np.float64).reshape(-1)
        self.n_components, self.dim = self.A.shape
        if self.b.shape[0] != self.n_components:
            raise ValueError("A and b disagree on the number of rows")

    def residuals(self, x):
        return self.A @ x - self.b

    def component_values(self, x):
        r = self.residuals(x)
        return 0.5 * r * r

    def component_grads(self, x):
        return self.A * self.residuals(x)[:, None]

    def component_grad(self, i, x):
        a = self.A[self._index(i)]
        return a * (a @ x - self.b[i])


class ConsistentLeastSquaresObjective(LeastSquaresObjective):
    """Least squares with b = A x*, evaluated in displacement form A (x - x*).

    Mathematically identical to ``LeastSquaresObjective(A, A @ x_star)``,
    but residuals vanish exactly at the planted point, so gaps far below
    machine epsilon times ||b|| stay resolvable.
    """

    def __init__(self, A, x_star):
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.x_star = np.asarray(x_star, dtype=np.float64).reshape(-1)
        super().__init__(A, A @ self.x_star)

    def residuals(self, x):
        return self.A @ (x - self.x_star)

    def component_grad(self, i, x):
        a = self.A[self._index(i)]
        return a * (a @ (x - self.x_star))


class FunctionListObjective(FiniteSumObjective):
    """Objective assembled from per-component Python callables.

    ``values[i](x)`` returns f_i(x), ``grads[i](x)`` returns f_i'(x).
    Mostly useful for fixtures and fault injection.
    """

    def __init__(self, values, grads, dim):
        if len(values) != len(grads) or not values:
            raise ValueError("need matching, non-empty value and gradient lists")
        self._values = list(values)
        self._grads = list(grads)
        self.n_components = len(values)
        self.dim = int(dim)

    def component_values(self, x):
        return np.array([float(f(x)) for f in self._values])

    def component_grads(self, x):
        return np.array([np.asarray(g(x), dtype=np.float64).reshape(self.dim) for g in self._grads])


def _finite(value, what):
    if not np.all(np.isfinite(value)):
        raise NumericOverflowError(f"{what} is not finite")
    return value


def full_value(obj: FiniteSumObjective, x) -> float:
    x = as_point(x, obj.dim)
    with np.errstate(over="ignore", invalid="ignore"):
        return _finite(obj.value(x), "objective value")


def full_gradient(obj: FiniteSumObjective, x) -> np.ndarray:
    x = as_point(x, obj.dim)
    with np.errstate(over="ignore", invalid="ignore"):
        return _finite(obj.grad(x), "gradient")


@dataclass(frozen=True)
class GradientError:
    """e = f_i'(x) - f'(x) for the component ``index``."""

    error: np.ndarray
    index: int


def gradient_error(obj: FiniteSumObjective, i: int, x) -> GradientError:
    x = as_point(x, obj.dim)
    g_i = obj.component_grad(i, x)
    return GradientError(error=g_i - full_gradient(obj, x), index=int(i))


def error_second_moment(obj: FiniteSumObjective, x) -> float:
    """Exact E||e||^2 under uniform sampling.

    Evaluated as the mean of ||f_i' - f'||^2, which equals
    mean ||f_i'||^2 - ||f'||^2 but cannot come out negative.
    """
    x = as_point(x, obj.dim)
    G = obj.component_grads(x)
    E = G - G.mean(axis=0)
    return _finite(float(np.mean(np.einsum("ij,ij->i", E, E))), "error second moment")


def default_stationarity_tol(x) -> float:
    return 1e-10 * (1.0 + float(np.linalg.norm(x)))


def growth_ratio(obj: FiniteSumObjective, x, tol: float | None = None) -> float:
    """max_i ||f_i'(x)|| / ||f'(x)||, or 1 where every gradient vanishes.

    Raises GrowthViolationError when f'(x) vanishes (within ``tol``) but some
    component gradient does not.
    """
    x = as_point(x, obj.dim)
    if tol is None:
        tol = default_stationarity_tol(x)
    if tol <= 0:
        raise ValueError("tol must be positive")
    G = obj.component_grads(x)
    comp_max = float(np.max(np.linalg.norm(G, axis=1)))
    full = float(np.linalg.norm(G.mean(axis=0)))
    if full <= tol:
        if comp_max <= tol:
            return 1.0
        raise GrowthViolationError(
            f"full gradient norm {full:.3g} <= tol but a component gradient has norm {comp_max:.3g}"
        )
    return comp_max / full


@dataclass(frozen=True)
class GradientCheck:
    max_rel_error: float
    per_component: np.ndarray

    def ok(self, threshold: float = 1e-6) -> bool:
        return self.max_rel_error < threshold


def check_gradient(obj: FiniteSumObjective, x, h: float = 1e-5) -> GradientCheck:
    """Compare analytic component gradients with central differences at ``x``."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = as_point(x, obj.dim)
    G = obj.component_grads(x)
    fd = np.empty_like(G)
    for j in range(obj.dim):
        step = np.zeros(obj.dim)
        step[j] = h
        fd[:, j] = (obj.component_values(x + step) - obj.component_values(x - step)) / (2 * h)
    diff = np.linalg.norm(fd - G, axis=1)
    scale = np.maximum(np.maximum(np.linalg.norm(G, axis=1), np.linalg.norm(fd, axis=1)), 1e-12)
    rel = diff / scale
    return GradientCheck(max_rel_error=float(np.max(rel)), per_component=rel)
