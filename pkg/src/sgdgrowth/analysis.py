"""Step-size windows, rate constants, descent bounds and empirical rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, WindowViolationError
from .objective import error_second_moment, full_gradient, full_value
from .optimizers import exact_expected_one_step
from .problems import ProblemConstants, sample_ball
from .rng import make_rng

GEOMETRIC = "geometric"
SUBLINEAR = "sublinear"


@dataclass(frozen=True)
class RateBound:
    kind: str
    alpha: float
    L: float
    mu: float
    B: float
    rho: float | None = None
    C: float | None = None

    def at(self, k, initial_gap: float | None = None):
        """Bound value at iteration(s) ``k``. Sublinear bounds are undefined at k = 0."""
        k = np.asarray(k, dtype=np.float64)
        if self.kind == GEOMETRIC:
            return self.rho ** k * initial_gap
        with np.errstate(divide="ignore"):
            return np.where(k >= 1, self.C / np.maximum(k, 1.0), np.nan)


def max_stable_step(L: float, B: float) -> float:
    """Open upper end 2/(L B^2) of the expected-descent window."""
    return 2.0 / (L * B * B)


def reference_step(L: float, B: float) -> float:
    return 1.0 / (L * B * B)


def in_window(alpha: float, L: float, B: float) -> bool:
    return 0.0 < alpha < max_stable_step(L, B)


def geometric_rate(mu: float, L: float, B: float, alpha: float) -> float:
    """rho = 1 - 2 mu alpha (1 - alpha L B^2 / 2)."""
    if not mu > 0:
        raise ValueError("geometric rate needs mu > 0")
    if not in_window(alpha, L, B):
        raise WindowViolationError(
            f"alpha={alpha!r} outside (0, {max_stable_step(L, B)!r}): no rate guarantee"
        )
    return 1.0 - 2.0 * mu * alpha * (1.0 - alpha * L * B * B / 2.0)


def descent_bound_rhs(f_x: float, grad_norm_sq: float, alpha: float, L: float, B: float) -> float:
    """Upper bound f(x) - alpha (1 - alpha L B^2 / 2) ||f'(x)||^2 on E[f(x+)]."""
    if not alpha > 0:
        raise ValueError("step size must be positive")
    return f_x - alpha * (1.0 - alpha * L * B * B / 2.0) * grad_norm_sq


def progress_bound_rhs(f_x: float, grad, err, alpha: float, L: float) -> float:
    """Per-realization upper bound on f(x - alpha (f' + e)) from L-smoothness alone."""
    grad = np.asarray(grad)
    err = np.asarray(err)
    return (f_x - alpha * (1.0 - alpha * L / 2.0) * float(grad @ grad)
            - alpha * (1.0 - alpha * L) * float(grad @ err)
            + alpha * alpha * L / 2.0 * float(err @ err))


def sublinear_constant(B: float, L: float, initial_gap: float, initial_dist: float) -> float:
    return (2.0 * (B * B - 1.0) * initial_gap + L * B * B * initial_dist ** 2) / 2.0


def sublinear_bound(B: float, L: float, initial_gap: float, initial_dist: float, k: int) -> float:
    """[2 (B^2 - 1) gap_0 + L B^2 ||x_0 - x*||^2] / (2k), valid at alpha = 1/(L B^2)."""
    if k < 1:
        raise ValueError("sublinear bound needs k >= 1")
    if B < 1 or L <= 0 or initial_gap < 0 or initial_dist < 0:
        raise ValueError("invalid constants for sublinear bound")
    return sublinear_constant(B, L, initial_gap, initial_dist) / k


def geometric_bound(constants: ProblemConstants, alpha: float) -> RateBound:
    c = constants
    return RateBound(GEOMETRIC, alpha, c.L, c.mu, c.B, rho=geometric_rate(c.mu, c.L, c.B, alpha))


def sublinear_rate_bound(constants: ProblemConstants, initial_gap: float, initial_dist: float) -> RateBound:
    c = constants
    return RateBound(SUBLINEAR, reference_step(c.L, c.B), c.L, c.mu, c.B,
                     C=sublinear_constant(c.B, c.L, initial_gap, initial_dist))


def fit_geometric_rate(gaps, burn_in: int = 5, floor: float | None = None) -> float:
    """exp of the least-squares slope of log(gap_k) against k.

    Uses entries with k > burn_in and gap_k > floor (default 1e-13 * gap_0).
    """
    gaps = np.asarray(gaps, dtype=np.float64)
    if floor is None:
        floor = 1e-13 * gaps[0]
    if not floor > 0:
        raise ValueError("floor must be positive")
    k = np.arange(gaps.shape[0])
    use = (k > burn_in) & np.isfinite(gaps) & (gaps > floor)
    if np.count_nonzero(use) < 10:
        raise InsufficientDataError(f"only {np.count_nonzero(use)} usable points for a rate fit")
    slope = np.polyfit(k[use], np.log(gaps[use]), 1)[0]
    return float(np.exp(slope))


@dataclass
class DescentReport:
    """Outcome of exact one-step checks at sampled points.

    ``descent_slack`` is min over points of rhs - E[f(x+)]; ``variance_slack``
    is min of (B^2 - 1)||f'||^2 - E||e||^2; ``contraction`` is the largest
    observed (E[f(x+)] - f*) / (f(x) - f*).
    """

    alpha: float
    in_window: bool
    n_points: int
    descent_slack: float
    variance_slack: float
    contraction: float
    descent_violations: int
    variance_violations: int
    increase_violations: int

    @property
    def passed(self) -> bool:
        return (self.in_window and self.descent_violations == 0
                and self.variance_violations == 0 and self.increase_violations == 0)


def verify_descent(obj, constants: ProblemConstants, alpha: float, n_points: int = 100, seed: int = 0,
                   center=None, radius: float = 1.0, f_star: float = 0.0) -> DescentReport:
    """Check the expected-descent and variance bounds exactly at ``n_points`` sampled points.

    A point violates descent if E[f(x+)] exceeds the bound by more than
    1e-9 |f(x)|, the variance bound if E||e||^2 exceeds it by more than
    1e-9, and monotonicity if E[f(x+)] > f(x) (beyond 1e-9 |f(x)|) where
    f'(x) != 0. Out-of-window steps never pass.
    """
    L, B = constants.L, constants.B
    center = np.zeros(obj.dim) if center is None else np.asarray(center, dtype=np.float64)
    pts = sample_ball(make_rng(seed), center, radius, n_points)
    d_slack = v_slack = math.inf
    contraction = 0.0
    d_bad = v_bad = inc_bad = 0
    for x in pts:
        f_x = full_value(obj, x)
        g = full_gradient(obj, x)
        gn2 = float(g @ g)
        expected = exact_expected_one_step(obj, x, alpha)
        slack = descent_bound_rhs(f_x, gn2, alpha, L, B) - expected
        d_slack = min(d_slack, slack)
        if slack < -1e-9 * abs(f_x):
            d_bad += 1
        vs = (B * B - 1.0) * gn2 - error_second_moment(obj, x)
        v_slack = min(v_slack, vs)
        if vs < -1e-9:
            v_bad += 1
        if gn2 > 0 and expected - f_x > 1e-9 * abs(f_x):
            inc_bad += 1
        if f_x - f_star > 0:
            contraction = max(contraction, (expected - f_star) / (f_x - f_star))
    return DescentReport(alpha, in_window(alpha, L, B), n_points, d_slack, v_slack, contraction,
                         d_bad, v_bad, inc_bad)
