import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgdgrowth.analysis import (
    descent_bound_rhs,
    fit_geometric_rate,
    geometric_rate,
    max_stable_step,
    progress_bound_rhs,
    reference_step,
    sublinear_bound,
    verify_descent,
)
from sgdgrowth.errors import InsufficientDataError, WindowViolationError
from sgdgrowth.objective import full_gradient, full_value, gradient_error
from sgdgrowth.optimizers import exact_expected_one_step
from sgdgrowth.problems import compute_constants, generate_scaled_quadratic, sample_ball
from sgdgrowth.rng import make_rng

from conftest import ZOO


def test_max_stable_step():
    assert max_stable_step(2.0, 1.5) == pytest.approx(4 / 9, rel=1e-15)
    assert max_stable_step(3.0, 1.0) == 2 / 3
    assert max_stable_step(1.0, 10.0) == pytest.approx(0.02, rel=1e-15)


def test_reference_step():
    assert reference_step(2.0, 1.5) == pytest.approx(2 / 9, rel=1e-15)
    assert reference_step(4.0, 1.0) == 0.25
    for L, B in [(2.0, 1.5), (0.3, 7.0), (1e3, 1.01)]:
        assert reference_step(L, B) == pytest.approx(max_stable_step(L, B) / 2, rel=1e-15)


def test_geometric_rate_examples():
    assert geometric_rate(2.0, 2.0, 1.5, 2 / 9) == pytest.approx(5 / 9, rel=1e-14)
    assert geometric_rate(0.5, 2.0, 1.0, 0.5) == pytest.approx(1 - 0.5 / 2.0, rel=1e-15)
    assert geometric_rate(2.0, 2.0, 1.0, 0.5) == 0.0
    with pytest.raises(WindowViolationError):
        geometric_rate(2.0, 2.0, 1.5, 4 / 9)
    with pytest.raises(WindowViolationError):
        geometric_rate(2.0, 2.0, 1.5, 0.5)


@settings(max_examples=200, deadline=None)
@given(mu=st.floats(1e-3, 1.0), ratio=st.floats(1.0, 100.0), B=st.floats(1.0, 20.0), frac=st.floats(0.01, 0.99))
def test_geometric_rate_in_unit_interval(mu, ratio, B, frac):
    L = mu * ratio
    alpha = frac * max_stable_step(L, B)
    rho = geometric_rate(mu, L, B, alpha)
    assert 0 <= rho < 1
    # at the reference step the rate is 1 - mu / (L B^2)
    assert geometric_rate(mu, L, B, reference_step(L, B)) == pytest.approx(1 - mu / (L * B * B), rel=1e-12)


def test_geometric_rate_monotone():
    L = 1.0
    mus = np.linspace(0.05, 1.0, 10)
    Bs = np.linspace(1.0, 5.0, 10)
    for B in Bs:
        rates = [geometric_rate(mu, L, B, reference_step(L, B)) for mu in mus]
        assert np.all(np.diff(rates) < 0)
    for mu in mus:
        rates = [geometric_rate(mu, L, B, 0.9 * reference_step(L, B)) for B in Bs]
        assert np.all(np.diff(rates) > 0)


def test_descent_bound_rhs_examples():
    assert descent_bound_rhs(1.0, 4.0, 2 / 9, 2.0, 1.5) == pytest.approx(5 / 9, rel=1e-15)
    assert 29 / 81 <= descent_bound_rhs(1.0, 4.0, 2 / 9, 2.0, 1.5)
    assert descent_bound_rhs(3.0, 0.0, 0.1, 2.0, 1.5) == 3.0
    assert descent_bound_rhs(1.0, 4.0, 4 / 9, 2.0, 1.5) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(f=st.floats(0, 10), g2=st.floats(0, 10), L=st.floats(0.1, 10), B=st.floats(1, 10))
def test_descent_rhs_at_reference_step(f, g2, L, B):
    assert descent_bound_rhs(f, g2, reference_step(L, B), L, B) == pytest.approx(
        f - g2 / (2 * L * B * B), rel=1e-12, abs=1e-12)


def test_sublinear_bound_examples():
    assert sublinear_bound(1.0, 2.0, 5.0, 1.0, 1) == 1.0
    assert sublinear_bound(1.5, 2.0, 1.0, 1.0, 1) == pytest.approx(3.5, rel=1e-15)
    assert sublinear_bound(1.5, 2.0, 1.0, 1.0, 70) == pytest.approx(sublinear_bound(1.5, 2.0, 1.0, 1.0, 7) / 10,
                                                                    rel=1e-15)
    with pytest.raises(ValueError):
        sublinear_bound(1.5, 2.0, 1.0, 1.0, 0)


def test_fit_geometric_rate():
    gaps = 0.5 ** np.arange(40)
    assert fit_geometric_rate(gaps, burn_in=5, floor=1e-300) == pytest.approx(0.5, abs=1e-12)
    base = fit_geometric_rate(gaps)
    noisy = np.concatenate([gaps, np.abs(make_rng(1).standard_normal(20)) * 1e-15])
    assert fit_geometric_rate(noisy) == base
    with pytest.raises(InsufficientDataError):
        fit_geometric_rate(gaps[:12])


def test_verify_descent_in_window(quad13):
    c = compute_constants(quad13)
    rep = verify_descent(quad13.objective, c, 2 / 9, 100, seed=3, radius=5.0)
    assert rep.passed
    assert rep.descent_slack > 0
    assert rep.contraction == pytest.approx(29 / 81, rel=1e-12)


def test_verify_descent_out_of_window_fails(quad13):
    c = compute_constants(quad13)
    # oracle: 1/2 [(1 - 0.99)^2 + (1 - 2.97)^2] = 1.9405 > 1
    assert exact_expected_one_step(quad13.objective, [1.0], 0.99) == pytest.approx(1.9405, rel=1e-12)
    rep = verify_descent(quad13.objective, c, 0.99, 100, seed=3)
    assert not rep.passed
    assert rep.increase_violations == 100
    assert not rep.in_window


def test_verify_descent_single_component():
    p = generate_scaled_quadratic([3.0], dim=2, x_star=[0.0, 1.0])
    rep = verify_descent(p.objective, compute_constants(p), 0.6, 50, seed=1)
    assert rep.passed


@settings(max_examples=60, deadline=None)
@given(idx=st.integers(0, len(ZOO) - 1), seed=st.integers(0, 2 ** 32), frac=st.floats(0.01, 0.999))
def test_expected_descent_chain(idx, seed, frac):
    p = ZOO[idx]
    c = compute_constants(p)
    alpha = frac * max_stable_step(c.L, c.B)
    x = sample_ball(make_rng(seed), p.x_star, 2.0, 1)[0]
    f = full_value(p.objective, x)
    g = full_gradient(p.objective, x)
    expected = exact_expected_one_step(p.objective, x, alpha)
    rhs = descent_bound_rhs(f, float(g @ g), alpha, c.L, c.B)
    assert expected <= rhs + 1e-9 * abs(f)
    if g @ g > 0:
        assert rhs <= f


@settings(max_examples=60, deadline=None)
@given(idx=st.integers(0, len(ZOO) - 1), seed=st.integers(0, 2 ** 32), frac=st.floats(0.01, 3.0))
def test_progress_inequality_every_realization(idx, seed, frac):
    p = ZOO[idx]
    c = compute_constants(p)
    alpha = frac / c.L
    x = sample_ball(make_rng(seed), p.x_star, 2.0, 1)[0]
    f = full_value(p.objective, x)
    g = full_gradient(p.objective, x)
    for i in range(p.n_components):
        e = gradient_error(p.objective, i, x).error
        x_new = x - alpha * p.objective.component_grad(i, x)
        assert full_value(p.objective, x_new) <= progress_bound_rhs(f, g, e, alpha, c.L) + 1e-9 * (1 + abs(f))


@pytest.mark.parametrize("curv", [[1.0, 3.0], [0.5, 1.0, 4.0], [2.0, 2.0], list(np.linspace(0.1, 10, 9))])
def test_geometric_bound_dominates_exact_factor(curv):
    p = generate_scaled_quadratic(curv)
    c = compute_constants(p)
    cs = np.asarray(curv)
    for frac in np.linspace(0.02, 0.98, 25):
        alpha = frac * max_stable_step(c.L, c.B)
        exact = np.mean((1 - alpha * cs) ** 2)
        assert geometric_rate(c.mu, c.L, c.B, alpha) >= exact - 1e-15


def test_pl_inequality_strongly_convex(instance):
    c = compute_constants(instance)
    if c.mu == 0:
        pytest.skip("merely convex")
    for x in sample_ball(make_rng(8), instance.x_star, 1.5, 200):
        g = full_gradient(instance.objective, x)
        assert g @ g >= 2 * c.mu * (full_value(instance.objective, x) - instance.f_star) * (1 - 1e-9)
