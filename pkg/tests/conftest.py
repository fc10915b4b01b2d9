import numpy as np
import pytest

from sgdgrowth.problems import (
    generate_consistent_least_squares,
    generate_scaled_quadratic,
    least_squares_instance,
)

ACCEPTANCE_LINES = []


def record_acceptance(criterion, ok, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def instance_zoo():
    """Ten instances across both families, including rank-deficient least squares."""
    zoo = [
        generate_scaled_quadratic([1.0, 3.0]),
        generate_scaled_quadratic([5.0], dim=3, x_star=[1.0, -2.0, 0.5]),
        generate_scaled_quadratic([0.5, 1.0, 4.0, 2.0], dim=4, x_star=[0.3, 0.0, -1.0, 2.0]),
        generate_scaled_quadratic(np.linspace(0.1, 10.0, 20), dim=2, x_star=[-1.0, 1.0]),
        generate_scaled_quadratic([2.0, 2.0, 2.0], dim=5),
        generate_consistent_least_squares(50, 10, 10, 10.0, seed=1),
        generate_consistent_least_squares(50, 10, 5, 10.0, seed=2),
        generate_consistent_least_squares(20, 5, 5, 3.0, seed=3),
        generate_consistent_least_squares(30, 8, 3, 100.0, seed=4),
        least_squares_instance([[2.0]], [3.0]),
    ]
    return zoo


ZOO = instance_zoo()
ZOO_IDS = [f"{p.family}-N{p.n_components}-P{p.dim}-{i}" for i, p in enumerate(ZOO)]


@pytest.fixture(params=range(len(ZOO)), ids=ZOO_IDS)
def instance(request):
    return ZOO[request.param]


@pytest.fixture
def quad13():
    return generate_scaled_quadratic([1.0, 3.0])
