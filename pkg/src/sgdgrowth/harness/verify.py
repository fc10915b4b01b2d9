"""Certificate suite run by ``sgdgrowth verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..analysis import verify_descent
from ..errors import GrowthViolationError
from ..objective import check_gradient
from ..problems import (
    ProblemInstance,
    compute_constants,
    estimate_growth_constant,
    interpolation_residuals,
    lipschitz_ratio,
    pl_ratio,
    sample_ball,
)
from ..rng import make_rng
from .config import StepSpec


@dataclass
class Check:
    name: str
    ok: bool
    detail: str


def verify_problem(p: ProblemInstance, step: StepSpec | None = None, n_points: int = 100,
                   n_samples: int = 1000, seed: int = 0, radius: float = 1.0) -> list[Check]:
    step = StepSpec() if step is None else step
    checks = []

    worst = max(check_gradient(p.objective, x).max_rel_error
                for x in sample_ball(make_rng(seed), p.x_star, radius, n_points))
    checks.append(Check("gradient", worst < 1e-6, f"max relative error {worst:.3g}"))

    norms, tol = interpolation_residuals(p)
    checks.append(Check("interpolation", bool(np.all(norms <= tol)),
                        f"max ||f_i'(x*)|| = {float(np.max(norms)):.3g}"))

    try:
        c = compute_constants(p)
    except GrowthViolationError as exc:
        checks.append(Check("growth", False, f"growth-violation: {exc}"))
        return checks
    try:
        b_hat = estimate_growth_constant(p.objective, p.x_star, n_samples, radius, seed)
        checks.append(Check("growth", b_hat <= c.B + 1e-9, f"empirical B {b_hat:.6g} vs certified {c.B:.6g}"))
    except GrowthViolationError as exc:
        checks.append(Check("growth", False, f"growth-violation: {exc}"))

    lr = lipschitz_ratio(p, c.L, n_samples, radius, seed)
    checks.append(Check("lipschitz", lr <= 1 + 1e-9, f"worst ratio {lr:.9g}"))

    if c.mu > 0:
        pr = pl_ratio(p, c.mu, n_samples, radius, seed)
        checks.append(Check("pl", pr >= 1 - 1e-9, f"worst ratio {pr:.9g}"))

    alpha = step.resolve(c.L, c.B)
    rep = verify_descent(p.objective, c, alpha, n_points, seed, center=p.x_star, radius=radius,
                         f_star=p.f_star)
    checks.append(Check("window", rep.in_window, f"alpha {alpha:.6g}, max stable {2 / (c.L * c.B ** 2):.6g}"))
    checks.append(Check("descent", rep.descent_violations == 0 and rep.increase_violations == 0,
                        f"worst slack {rep.descent_slack:.3g}, max contraction {rep.contraction:.6g}"))
    checks.append(Check("variance", rep.variance_violations == 0, f"worst slack {rep.variance_slack:.3g}"))
    return checks
