"""Constant-step SGD under the strong growth condition, with certified bounds."""

from .analysis import (
    descent_bound_rhs,
    fit_geometric_rate,
    geometric_rate,
    max_stable_step,
    reference_step,
    sublinear_bound,
    verify_descent,
)
from .objective import (
    error_second_moment,
    full_gradient,
    full_value,
    gradient_error,
    growth_ratio,
)
from .optimizers import StepConfig, Trajectory, exact_expected_one_step, run
from .problems import (
    ProblemConstants,
    ProblemInstance,
    compute_constants,
    estimate_growth_constant,
    generate_consistent_least_squares,
    generate_scaled_quadratic,
)

__version__ = "0.1.0"
