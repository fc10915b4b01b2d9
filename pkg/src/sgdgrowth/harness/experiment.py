"""Replica-averaged estimates of E[f(x_k)] - f* with theoretical overlays."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..analysis import (
    fit_geometric_rate,
    geometric_rate,
    in_window,
    reference_step,
    sublinear_constant,
)
from ..errors import DivergenceError, InsufficientDataError
from ..optimizers import GD, SGD, StepConfig, run
from ..problems import ProblemConstants, ProblemInstance, compute_constants
from ..rng import derive_seed
from .config import ExperimentConfig

# Bound checks compare the bound with mean + MC_SIGMAS * stderr.
MC_SIGMAS = 3.0


@dataclass
class MethodResult:
    method: str
    mean_gap: np.ndarray
    stderr: np.ndarray
    bound: np.ndarray | None
    bound_kind: str | None
    fitted_rate: float | None
    violations: int
    diverged: list = field(default_factory=list)


@dataclass
class ExperimentReport:
    constants: ProblemConstants
    alpha: float
    replicas: int
    iterations: int
    initial_gap: float
    initial_dist: float
    results: dict

    @property
    def in_window(self) -> bool:
        return in_window(self.alpha, self.constants.L, self.constants.B)

    def total_violations(self) -> int:
        return sum(r.violations for r in self.results.values())


def _replica_gaps(problem: ProblemInstance, method: str, alpha: float, K: int, x0: np.ndarray,
                  seed: int) -> tuple[np.ndarray, int | None]:
    cfg = StepConfig(alpha, K, seed, x0)
    try:
        traj = run(method, problem.objective, cfg, problem.x_star, problem.f_star)
    except DivergenceError as exc:
        gaps = np.full(K + 1, np.inf)
        gaps[:exc.iteration] = exc.partial
        return gaps, exc.iteration
    return traj.gaps, None


def _run_chunk(args):
    problem, method, alpha, K, x0, seeds = args
    return [_replica_gaps(problem, method, alpha, K, x0, s) for s in seeds]


def replica_seeds(master: int, replicas: int) -> list[int]:
    return [derive_seed(master, r) for r in range(replicas)]


def simulate(problem: ProblemInstance, method: str, alpha: float, K: int, x0: np.ndarray,
             seeds: list[int], workers: int = 1) -> tuple[np.ndarray, list]:
    """Gap series for each seed, as an array indexed by replica; plus divergence records.

    Output is identical for any ``workers``: chunks are reassembled by index.
    """
    if workers <= 1 or len(seeds) < 2:
        out = _run_chunk((problem, method, alpha, K, x0, seeds))
    else:
        n_chunks = min(len(seeds), 4 * workers)
        bounds = np.linspace(0, len(seeds), n_chunks + 1).astype(int)
        chunks = [(problem, method, alpha, K, x0, seeds[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = [item for part in pool.map(_run_chunk, chunks) for item in part]
    gaps = np.array([g for g, _ in out])
    diverged = [(r, it) for r, (_, it) in enumerate(out) if it is not None]
    return gaps, diverged


def aggregate(gaps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and standard error over replicas (rows).

    The mean is taken as row 0 plus the mean offset from row 0, so columns
    whose replicas agree reproduce that value exactly.
    """
    R = gaps.shape[0]
    with np.errstate(invalid="ignore", over="ignore"):
        ref = gaps[0]
        dev = gaps - ref
        mean = ref + dev.sum(axis=0) / R
        bad = ~np.isfinite(mean)
        mean[bad] = gaps[:, bad].sum(axis=0) / R
        if R == 1:
            return mean, np.zeros_like(mean)
        var = ((gaps - mean) ** 2).sum(axis=0) / (R - 1)
        stderr = np.sqrt(var / R)
    stderr[~np.isfinite(mean)] = np.inf
    return mean, stderr


def bound_curve(method: str, constants: ProblemConstants, alpha: float, K: int, initial_gap: float,
                initial_dist: float) -> tuple[np.ndarray | None, str | None]:
    """Theoretical overlay for ``method``, or (None, None) where no result applies.

    Geometric: mu > 0, sgd or gd, alpha in window. Sublinear: mu = 0, sgd,
    alpha = 1/(L B^2); undefined (nan) at k = 0.
    """
    c = constants
    k = np.arange(K + 1, dtype=np.float64)
    if method not in (SGD, GD) or not in_window(alpha, c.L, c.B):
        return None, None
    if c.mu > 0:
        rho = geometric_rate(c.mu, c.L, c.B, alpha)
        return rho ** k * initial_gap, "geometric"
    if method == SGD and math.isclose(alpha, reference_step(c.L, c.B), rel_tol=1e-12):
        C = sublinear_constant(c.B, c.L, initial_gap, initial_dist)
        bound = np.full(K + 1, np.nan)
        bound[1:] = C / k[1:]
        return bound, "sublinear"
    return None, None


def count_violations(mean: np.ndarray, stderr: np.ndarray, bound: np.ndarray | None) -> int:
    if bound is None:
        return 0
    defined = np.isfinite(bound)
    with np.errstate(invalid="ignore"):
        bad = ~(mean[defined] <= bound[defined] + MC_SIGMAS * stderr[defined])
    return int(np.count_nonzero(bad))


def fitted_rate(mean: np.ndarray, burn_in: int = 5) -> float | None:
    if mean.shape[0] == 0 or not np.isfinite(mean[0]) or mean[0] <= 0:
        return None
    try:
        return fit_geometric_rate(mean, burn_in=burn_in)
    except InsufficientDataError:
        return None


def run_experiment(config: ExperimentConfig, base: Path | None = None,
                   problem: ProblemInstance | None = None) -> ExperimentReport:
    """Run every configured method for ``config.replicas`` seeded replicas.

    Replica r of sgd uses the stream seeded by derive_seed(master, r). gd
    and cyclic-ig are deterministic, so they are run once and carry zero
    standard error.
    """
    problem = config.problem.build(base) if problem is None else problem
    constants = compute_constants(problem)
    alpha = config.step.resolve(constants.L, constants.B)
    x0 = config.initial_point(problem)
    K = config.iterations
    initial_gap = problem.objective.value(x0) - problem.f_star
    initial_dist = float(np.linalg.norm(x0 - problem.x_star))
    results = {}
    for method in config.methods:
        if method == SGD:
            seeds = replica_seeds(config.seed, config.replicas)
        else:
            seeds = [0]
        gaps, diverged = simulate(problem, method, alpha, K, x0, seeds, config.workers)
        mean, stderr = aggregate(gaps)
        bound, kind = bound_curve(method, constants, alpha, K, initial_gap, initial_dist)
        results[method] = MethodResult(
            method=method,
            mean_gap=mean,
            stderr=stderr,
            bound=bound,
            bound_kind=kind,
            fitted_rate=fitted_rate(mean),
            violations=count_violations(mean, stderr, bound),
            diverged=diverged,
        )
    return ExperimentReport(constants, alpha, config.replicas, K, initial_gap, initial_dist, results)
