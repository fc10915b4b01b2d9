"""Synthetic interpolating problems with certified constants L, mu and B."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import GrowthViolationError, NumericFailureError
from .objective import (
    ConsistentLeastSquaresObjective,
    FiniteSumObjective,
    LeastSquaresObjective,
    ScaledQuadraticObjective,
    growth_ratio,
)
from .rng import MASK64, make_rng

SCALED_QUADRATIC = "scaled-quadratic"
CONSISTENT_LEAST_SQUARES = "consistent-least-squares"
LEAST_SQUARES = "least-squares"
FAMILIES = (SCALED_QUADRATIC, CONSISTENT_LEAST_SQUARES, LEAST_SQUARES)

EIG_TOL = 1e-10


@dataclass(eq=False)
class ProblemInstance:
    objective: FiniteSumObjective
    x_star: np.ndarray
    f_star: float
    family: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return self.objective.n_components

    @property
    def dim(self) -> int:
        return self.objective.dim


@dataclass(frozen=True)
class ProblemConstants:
    L: float
    mu: float
    B: float

    @property
    def strongly_convex(self) -> bool:
        return self.mu > 0


def generate_scaled_quadratic(curvatures, dim: int = 1, x_star=None, seed: int = 0) -> ProblemInstance:
    """Components f_i(x) = (c_i/2)||x - x*||^2; exact constants L = mu = mean(c), B = max(c)/mean(c)."""
    c = np.asarray(curvatures, dtype=np.float64).reshape(-1)
    if c.size < 1:
        raise ValueError("need at least one curvature")
    if not np.all(c > 0) or not np.all(np.isfinite(c)):
        raise ValueError("curvatures must be positive and finite")
    if dim < 1:
        raise ValueError("dimension must be positive")
    x_star = np.zeros(dim) if x_star is None else np.asarray(x_star, dtype=np.float64).reshape(-1)
    if x_star.shape[0] != dim:
        raise ValueError("minimizer dimension does not match")
    obj = ScaledQuadraticObjective(c, x_star)
    return ProblemInstance(obj, x_star.copy(), 0.0, SCALED_QUADRATIC, seed, {"dimension": dim})


def least_squares_instance(A, x_star, seed: int = 0, params=None) -> ProblemInstance:
    """Consistent least squares with b = A x* from explicit data."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    x_star = np.asarray(x_star, dtype=np.float64).reshape(-1)
    obj = ConsistentLeastSquaresObjective(A, x_star)
    return ProblemInstance(obj, x_star.copy(), 0.0, CONSISTENT_LEAST_SQUARES, seed, dict(params or {}))


def singular_value_profile(rank: int, kappa: float, sigma_max: float) -> np.ndarray:
    if rank == 1:
        return np.array([sigma_max])
    return sigma_max * kappa ** (-np.linspace(0.0, 1.0, rank))


def generate_consistent_least_squares(n: int, p: int, rank: int | None = None, kappa: float = 10.0,
                                      seed: int = 0, sigma_max: float | None = None) -> ProblemInstance:
    """Rows of A = U diag(sigma) V^T with log-spaced sigma in [sigma_max/kappa, sigma_max].

    ``sigma_max`` defaults to sqrt(n) so that L = 1. The planted x* is
    standard normal and b = A x*, so every residual vanishes at x*.
    """
    rank = min(n, p) if rank is None else rank
    if n < 1 or p < 1 or not 1 <= rank <= min(n, p):
        raise ValueError(f"infeasible rank {rank} for a {n}x{p} matrix")
    if not kappa >= 1:
        raise ValueError("kappa must be >= 1")
    sigma_max = math.sqrt(n) if sigma_max is None else float(sigma_max)
    rng = make_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((n, rank)))
    V, _ = np.linalg.qr(rng.standard_normal((p, rank)))
    sigma = singular_value_profile(rank, kappa, sigma_max)
    A = (U * sigma) @ V.T
    x_star = rng.standard_normal(p)
    params = {"n": n, "p": p, "rank": rank, "kappa": float(kappa), "sigma_max": sigma_max}
    return least_squares_instance(A, x_star, seed=seed, params=params)


def non_interpolating_fixture() -> ProblemInstance:
    """f_1 = (x-1)^2/2, f_2 = (x+1)^2/2: f'(0) = 0 while f_i'(0) = -1, +1."""
    obj = LeastSquaresObjective([[1.0], [1.0]], [1.0, -1.0])
    return ProblemInstance(obj, np.zeros(1), 0.5, LEAST_SQUARES, 0, {})


def power_iteration(M, tol: float = EIG_TOL, max_iter: int | None = None,
                    seed: int = 0) -> tuple[float, np.ndarray]:
    """Dominant eigenpair of a symmetric positive semidefinite operator.

    ``M`` is a matrix or a callable v -> M v of dimension ``len(seed vector)``.
    Stops when the Rayleigh quotient changes by at most ``tol`` relative.
    Raises NumericFailureError after ``max_iter`` (default 100 * dim) steps.
    """
    if callable(M):
        apply, n = M, M.dim
    else:
        apply, n = (lambda v: M @ v), M.shape[0]
    max_iter = 100 * n if max_iter is None else max_iter
    v = make_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    w = apply(v)
    theta = float(v @ w)
    for _ in range(max_iter):
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, v
        v = w / nw
        w = apply(v)
        new_theta = float(v @ w)
        if abs(new_theta - theta) <= tol * abs(new_theta):
            return new_theta, v
        theta = new_theta
    raise NumericFailureError(f"power iteration did not converge in {max_iter} iterations")


class _InverseOperator:
    """v -> M^{-1} v through a Cholesky factor; None if M is numerically singular."""

    def __init__(self, M):
        self.dim = M.shape[0]
        self.factor = scipy.linalg.cho_factor(M)

    def __call__(self, v):
        return scipy.linalg.cho_solve(self.factor, v)


def extreme_eigenvalues(M: np.ndarray, tol: float = EIG_TOL, seed: int = 0) -> tuple[float, float]:
    """(lambda_max, lambda_min) of a symmetric PSD matrix.

    lambda_max by power iteration; lambda_min by power iteration on M^{-1}
    (inverse iteration), reported as the Rayleigh quotient of M at the
    converged vector. A singular M gives lambda_min = 0.
    """
    lam_max, _ = power_iteration(M, tol, seed=seed)
    if M.shape[0] == 1:
        return lam_max, lam_max
    try:
        inv = _InverseOperator(M)
    except np.linalg.LinAlgError:
        return lam_max, 0.0
    _, v = power_iteration(inv, tol, seed=(seed + 1) & MASK64)
    lam_min = float(v @ M @ v)
    if lam_min <= 1e-14 * lam_max:
        return lam_max, 0.0
    return lam_max, lam_min


def compute_constants(p: ProblemInstance) -> ProblemConstants:
    obj = p.objective
    if isinstance(obj, ScaledQuadraticObjective):
        c = obj.curvatures
        cbar = float(np.mean(c))
        return ProblemConstants(cbar, cbar, float(np.max(c)) / cbar)
    if isinstance(obj, LeastSquaresObjective):
        return _least_squares_constants(p)
    raise TypeError(f"no closed-form constants for {type(obj).__name__}")


def _least_squares_constants(p: ProblemInstance) -> ProblemConstants:
    obj = p.objective
    A, N = obj.A, obj.n_components
    if not isinstance(obj, ConsistentLeastSquaresObjective):
        r = obj.residuals(p.x_star)
        if np.linalg.norm(r) > 1e-12 * (1.0 + np.linalg.norm(obj.b)):
            raise GrowthViolationError("residuals do not vanish at x*: no finite growth constant")
    M = A.T @ A / N
    L, lam_min = extreme_eigenvalues(M, seed=p.seed)
    # smallest nonzero singular value: restrict A^T A to the row space of A
    Q = scipy.linalg.orth(A.T)
    if Q.shape[1] == 0:
        raise ValueError("A is zero")
    rank = Q.shape[1]
    _, sigma_plus_sq_over_n = extreme_eigenvalues(Q.T @ M @ Q, seed=p.seed)
    mu = lam_min if rank == obj.dim else 0.0
    sigma_plus = math.sqrt(N * sigma_plus_sq_over_n)
    row_norm = float(np.max(np.linalg.norm(A, axis=1)))
    B = max(N * row_norm / sigma_plus, 1.0)
    return ProblemConstants(L, mu, B)


def sample_ball(rng: np.random.Generator, center: np.ndarray, radius: float, n: int) -> np.ndarray:
    """``n`` points uniform in the ball around ``center``, never the center itself."""
    dim = center.shape[0]
    out = np.empty((n, dim))
    filled = 0
    while filled < n:
        d = rng.standard_normal((n - filled, dim))
        norms = np.linalg.norm(d, axis=1)
        u = rng.random(n - filled) ** (1.0 / dim)
        keep = (norms > 0) & (u > 0)
        pts = center + radius * (u[keep] / norms[keep])[:, None] * d[keep]
        out[filled:filled + pts.shape[0]] = pts
        filled += pts.shape[0]
    return out


def estimate_growth_constant(obj: FiniteSumObjective, x_star, n_samples: int = 1000,
                             radius: float = 1.0, seed: int = 0) -> float:
    """Largest growth ratio over points sampled in a ball around x*; a lower bound on B."""
    if n_samples < 1 or radius <= 0:
        raise ValueError("need n_samples >= 1 and radius > 0")
    x_star = np.asarray(x_star, dtype=np.float64).reshape(-1)
    pts = sample_ball(make_rng(seed), x_star, radius, n_samples)
    return max(growth_ratio(obj, x) for x in pts)


# -- certificates ------------------------------------------------------------

def interpolation_residuals(p: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """Per-component ||f_i'(x*)|| and the tolerance each must meet."""
    obj = p.objective
    G = obj.component_grads(p.x_star)
    norms = np.linalg.norm(G, axis=1)
    xn = float(np.linalg.norm(p.x_star))
    if isinstance(obj, ScaledQuadraticObjective):
        scale = obj.curvatures
    elif isinstance(obj, LeastSquaresObjective):
        scale = np.einsum("ij,ij->i", obj.A, obj.A)
    else:
        scale = np.ones(obj.n_components)
    return norms, 1e-9 * (1.0 + scale * xn)


def interpolates(p: ProblemInstance) -> bool:
    norms, tol = interpolation_residuals(p)
    return bool(np.all(norms <= tol))


def lipschitz_ratio(p: ProblemInstance, L: float, n_pairs: int = 1000, radius: float = 1.0,
                    seed: int = 0) -> float:
    """max ||f'(x) - f'(y)|| / (L ||x - y||) over sampled pairs; at most 1 + 1e-9 if L is valid."""
    rng = make_rng(seed)
    xs = sample_ball(rng, p.x_star, radius, n_pairs)
    ys = sample_ball(rng, p.x_star, radius, n_pairs)
    worst = 0.0
    for x, y in zip(xs, ys):
        dx = np.linalg.norm(x - y)
        if dx == 0:
            continue
        worst = max(worst, np.linalg.norm(p.objective.grad(x) - p.objective.grad(y)) / (L * dx))
    return float(worst)


def pl_ratio(p: ProblemInstance, mu: float, n_points: int = 1000, radius: float = 1.0,
             seed: int = 0) -> float:
    """min ||f'(x)||^2 / (2 mu (f(x) - f*)); at least 1 - 1e-9 if mu is valid."""
    if mu <= 0:
        raise ValueError("PL certificate needs mu > 0")
    worst = math.inf
    for x in sample_ball(make_rng(seed), p.x_star, radius, n_points):
        gap = p.objective.value(x) - p.f_star
        if gap <= 0:
            continue
        g = p.objective.grad(x)
        worst = min(worst, float(g @ g) / (2.0 * mu * gap))
    return worst
