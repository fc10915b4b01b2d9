"""Sweep alpha as a multiple of 2/(L B^2) on a scaled quadratic.

For each multiple, prints the exact one-step contraction of E[f] (by
enumerating components), the guaranteed rate where it exists, and the rate
fitted from replica-averaged SGD gaps.
"""

import argparse

import numpy as np

from sgdgrowth.analysis import geometric_rate, in_window, max_stable_step
from sgdgrowth.harness.config import ExperimentConfig, ProblemSpec, StepSpec
from sgdgrowth.harness.experiment import run_experiment
from sgdgrowth.optimizers import exact_expected_one_step
from sgdgrowth.problems import compute_constants, generate_scaled_quadratic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--curvatures", default="1,3")
    ap.add_argument("--replicas", type=int, default=2000)
    ap.add_argument("--iters", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    curv = [float(c) for c in args.curvatures.split(",")]
    p = generate_scaled_quadratic(curv)
    c = compute_constants(p)
    x0 = np.ones(1)
    print(f"L={c.L:g} mu={c.mu:g} B={c.B:g} max stable step={max_stable_step(c.L, c.B):g}")
    print(f"{'multiple':>9} {'alpha':>9} {'exact':>9} {'guarantee':>9} {'fitted':>9}")
    for m in (0.1, 0.25, 0.5, 0.75, 0.95, 1.0, 1.2, 1.5, 2.0):
        alpha = m * max_stable_step(c.L, c.B)
        exact = exact_expected_one_step(p.objective, x0, alpha) / p.objective.value(x0)
        rho = geometric_rate(c.mu, c.L, c.B, alpha) if in_window(alpha, c.L, c.B) else float("nan")
        cfg = ExperimentConfig(ProblemSpec("scaled-quadratic", {"curvatures": curv}), ("sgd",),
                               StepSpec("value", alpha), args.replicas, args.iters, args.seed, "1")
        fitted = run_experiment(cfg).results["sgd"].fitted_rate
        fitted = float("nan") if fitted is None else fitted
        print(f"{m:9.2f} {alpha:9.4f} {exact:9.4f} {rho:9.4f} {fitted:9.4f}")


if __name__ == "__main__":
    main()
