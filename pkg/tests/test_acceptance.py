"""Exit criteria. Each test records a PASS/FAIL line shown in the terminal summary."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from sgdgrowth.analysis import descent_bound_rhs, max_stable_step, reference_step
from sgdgrowth.errors import GrowthViolationError
from sgdgrowth.harness.cli import main
from sgdgrowth.harness.config import ExperimentConfig, ProblemSpec, StepSpec
from sgdgrowth.harness.experiment import replica_seeds, run_experiment, simulate
from sgdgrowth.objective import (
    check_gradient,
    error_second_moment,
    full_gradient,
    full_value,
    gradient_error,
    growth_ratio,
)
from sgdgrowth.optimizers import exact_expected_one_step
from sgdgrowth.problems import (
    compute_constants,
    generate_consistent_least_squares,
    generate_scaled_quadratic,
    interpolation_residuals,
    non_interpolating_fixture,
    sample_ball,
)
from sgdgrowth.rng import make_rng

from conftest import ZOO, record_acceptance

STEP_FRACTIONS = (0.1, 0.3, 0.5, 0.7, 0.95)
N_POINTS = 100


def descent_grid(fractions):
    """Worst descent slack (relative to |f|) and variance slack over the instance grid."""
    descent_bad = variance_bad = 0
    worst_desc = worst_var = math.inf
    for j, p in enumerate(ZOO):
        c = compute_constants(p)
        pts = sample_ball(make_rng(1000 + j), p.x_star, 2.0, N_POINTS)
        for x in pts:
            f = full_value(p.objective, x)
            g = full_gradient(p.objective, x)
            g2 = float(g @ g)
            vs = (c.B ** 2 - 1) * g2 + 1e-9 - error_second_moment(p.objective, x)
            worst_var = min(worst_var, vs)
            for frac in fractions:
                alpha = frac * max_stable_step(c.L, c.B)
                slack = descent_bound_rhs(f, g2, alpha, c.L, c.B) - exact_expected_one_step(p.objective, x, alpha)
                worst_desc = min(worst_desc, slack / max(abs(f), 1e-300))
                if slack < -1e-9 * abs(f):
                    descent_bad += 1
                if vs < 0:
                    variance_bad += 1
    return descent_bad, worst_desc, variance_bad, worst_var


@pytest.fixture(scope="module")
def grid():
    t = time.perf_counter()
    out = descent_grid(STEP_FRACTIONS)
    return out, time.perf_counter() - t


def test_c1_expected_descent(grid):
    (bad, worst, _, _), elapsed = grid
    families = {p.family for p in ZOO}
    ok = bad == 0 and elapsed < 10 and len(ZOO) == 10 and len(families) == 2
    record_acceptance(1, ok, f"{bad} violations, worst relative slack {worst:.3g}, {elapsed:.2f}s")
    assert bad == 0
    assert elapsed < 10


def test_c2_variance_bound(grid):
    (_, _, bad, worst), _ = grid
    record_acceptance(2, bad == 0, f"{bad} violations, worst slack {worst:.3g}")
    assert bad == 0


def test_c3_zero_mean_error():
    worst = 0.0
    for j, p in enumerate(ZOO):
        for x in sample_ball(make_rng(2000 + j), p.x_star, 2.0, N_POINTS):
            E = np.array([gradient_error(p.objective, i, x).error for i in range(p.n_components)])
            scale = np.max(np.linalg.norm(p.objective.component_grads(x), axis=1))
            worst = max(worst, np.linalg.norm(E.sum(axis=0)) / (p.n_components * scale))
    record_acceptance(3, worst <= 1e-12, f"max relative |sum e_i| {worst:.3g}")
    assert worst <= 1e-12


def exact_factor(curvatures, alpha):
    """E[(1 - alpha c_i)^2] by enumerating components, in exact rational arithmetic."""
    return sum((1 - alpha * Fraction(c)) ** 2 for c in curvatures) / len(curvatures)


def test_c4_scalar_oracle():
    assert exact_factor([1, 3], Fraction(2, 9)) == Fraction(29, 81)
    cfg = ExperimentConfig(ProblemSpec("scaled-quadratic", {"curvatures": [1.0, 3.0]}), ("sgd",),
                           StepSpec("reference"), replicas=10_000, iterations=40, seed=2024, x0="1")
    t = time.perf_counter()
    report = run_experiment(cfg)
    elapsed = time.perf_counter() - t
    rho = report.results["sgd"].fitted_rate
    theory = 1 - report.constants.mu / (report.constants.L * report.constants.B ** 2)
    ok = abs(rho - 29 / 81) <= 0.02 and rho <= theory and elapsed < 30
    record_acceptance(4, ok, f"fitted rho {rho:.5f} vs 29/81 = {29 / 81:.5f}, theory {theory:.5f}, {elapsed:.1f}s")
    assert report.alpha == pytest.approx(2 / 9, rel=1e-15)
    assert theory == pytest.approx(5 / 9, rel=1e-15)
    assert abs(rho - 29 / 81) <= 0.02
    assert rho <= theory
    assert elapsed < 30


def test_c5_linear_rate_certification():
    cfg = ExperimentConfig(ProblemSpec("consistent-least-squares", {"n": 50, "p": 10, "rank": 10, "kappa": 10.0},
                                       seed=5), ("sgd",), StepSpec("reference"), replicas=1000, iterations=200,
                           seed=55, x0="zeros")
    t = time.perf_counter()
    report = run_experiment(cfg)
    elapsed = time.perf_counter() - t
    res = report.results["sgd"]
    assert report.constants.mu > 0 and res.bound_kind == "geometric"
    ok_frac = np.mean(res.mean_gap <= res.bound + 3 * res.stderr)
    ok = ok_frac >= 0.999 and elapsed < 120
    record_acceptance(5, ok, f"bound holds at {ok_frac:.4%} of iterations, {elapsed:.1f}s")
    assert ok_frac >= 0.999
    assert elapsed < 120


def test_c6_sublinear_certification():
    cfg = ExperimentConfig(ProblemSpec("consistent-least-squares", {"n": 50, "p": 10, "rank": 5, "kappa": 10.0},
                                       seed=6), ("sgd",), StepSpec("reference"), replicas=1000, iterations=500,
                           seed=66, x0="zeros")
    t = time.perf_counter()
    report = run_experiment(cfg)
    elapsed = time.perf_counter() - t
    res = report.results["sgd"]
    assert report.constants.mu == 0 and res.bound_kind == "sublinear"
    k = np.arange(1, 501)
    holds = res.mean_gap[k] <= res.bound[k] + 3 * res.stderr[k]
    ok = bool(np.all(holds)) and elapsed < 180
    record_acceptance(6, ok, f"{np.count_nonzero(~holds)} violations for k >= 1, {elapsed:.1f}s")
    assert np.all(holds)
    assert elapsed < 180


def test_c7_window_edge_inside():
    bad, worst, _, _ = descent_grid((0.95,))
    record_acceptance("7a", bad == 0, f"alpha = 0.95 * 2/(L B^2): {bad} violations")
    assert bad == 0


def test_c7_window_edge_exact_factor_above_one():
    p = generate_scaled_quadratic([1.0, 3.0])
    c = compute_constants(p)
    alpha = 1.2 * max_stable_step(c.L, c.B)
    oracle = float(exact_factor([1, 3], Fraction(alpha)))
    enumerated = exact_expected_one_step(p.objective, [1.0], alpha) / full_value(p.objective, [1.0])
    assert enumerated == pytest.approx(oracle, rel=1e-12)
    record_acceptance("7b", oracle > 1, f"exact factor at 1.2 * 2/(L B^2) is {oracle:.6f}")
    assert oracle > 1


def test_c7_window_edge_verify_exit(tmp_path):
    prob = tmp_path / "q.txt"
    assert main(["generate", "--family", "scaled-quadratic", "--curvatures", "1,3", "--out", str(prob), "--quiet"]) == 0
    code = main(["verify", "--config", str(prob), "--step", "out-of-window:1.2", "--quiet"])
    record_acceptance("7c", code == 1, f"verify exit code {code}")
    assert code == 1


def test_c8_interpolation_certificates():
    worst = 0.0
    for p in ZOO + [generate_consistent_least_squares(50, 10, 10, 10.0, seed=5),
                    generate_consistent_least_squares(50, 10, 5, 10.0, seed=6)]:
        norms, tol = interpolation_residuals(p)
        worst = max(worst, float(np.max(norms / tol)))
    fixture = non_interpolating_fixture()
    with pytest.raises(GrowthViolationError):
        growth_ratio(fixture.objective, fixture.x_star)
    record_acceptance(8, worst <= 1.0, f"max ||f_i'(x*)|| / tolerance {worst:.3g}; fixture raises growth-violation")
    assert worst <= 1.0


def test_c9_gradient_checks():
    worst = 0.0
    for j, p in enumerate(ZOO):
        for x in sample_ball(make_rng(3000 + j), p.x_star, 2.0, N_POINTS):
            worst = max(worst, check_gradient(p.objective, x, 1e-5).max_rel_error)
    record_acceptance(9, worst < 1e-6, f"max finite-difference relative error {worst:.3g}")
    assert worst < 1e-6


def test_c10_determinism(tmp_path):
    text = ExperimentConfig(ProblemSpec("consistent-least-squares", {"n": 20, "p": 5, "rank": 3, "kappa": 4.0},
                                        seed=10), ("sgd", "gd", "cyclic-ig"), StepSpec("reference"), replicas=64,
                            iterations=30, seed=1010).to_text()
    cfg = tmp_path / "exp.ini"
    cfg.write_text(text)
    outs = [tmp_path / f"{name}.csv" for name in ("a", "b", "par")]
    codes = [main(["run", "--config", str(cfg), "--out", str(outs[0]), "--quiet"]),
             main(["run", "--config", str(cfg), "--out", str(outs[1]), "--quiet"]),
             main(["run", "--config", str(cfg), "--out", str(outs[2]), "--quiet", "--workers", "4"])]
    same = outs[0].read_bytes() == outs[1].read_bytes() == outs[2].read_bytes()
    p = generate_scaled_quadratic([1.0, 3.0])
    seeds = replica_seeds(77, 40)
    serial, _ = simulate(p, "sgd", 2 / 9, 25, np.array([1.0]), seeds, workers=1)
    parallel, _ = simulate(p, "sgd", 2 / 9, 25, np.array([1.0]), seeds, workers=4)
    same = same and serial.tobytes() == parallel.tobytes()
    record_acceptance(10, same and codes == [0, 0, 0], "repeat and parallel runs byte-identical" if same else "mismatch")
    assert codes == [0, 0, 0]
    assert same
