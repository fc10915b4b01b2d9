"""Command line: ``sgdgrowth {generate,verify,run,report}``.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from ..problems import generate_consistent_least_squares, generate_scaled_quadratic, non_interpolating_fixture
from .config import ConfigError, ExperimentConfig, StepSpec, parse_vector, read_problem, write_problem
from .csvio import emit_csv, read_csv, summary_text
from .experiment import fitted_rate, run_experiment
from .verify import verify_problem


class UsageError(Exception):
    pass


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sgdgrowth", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=_u64, default=None)
        p.add_argument("--quiet", action="store_true")

    g = sub.add_parser("generate", help="write a problem file")
    g.add_argument("--family", required=True,
                   choices=["scaled-quadratic", "consistent-least-squares", "non-interpolating"])
    g.add_argument("--curvatures", default="1, 3")
    g.add_argument("--dim", type=int, default=1)
    g.add_argument("--minimizer", default=None)
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--p", type=int, default=10)
    g.add_argument("--rank", type=int, default=None)
    g.add_argument("--kappa", type=float, default=10.0)
    g.add_argument("--out", required=True)
    common(g)

    v = sub.add_parser("verify", help="run certificates on a problem or experiment config")
    v.add_argument("--config", required=True, help="problem file or experiment config")
    v.add_argument("--step", default=None, help="reference | half-max | out-of-window:<m> | <alpha>")
    v.add_argument("--points", type=int, default=100)
    common(v)

    r = sub.add_parser("run", help="execute an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None)
    r.add_argument("--replicas", type=int, default=None)
    r.add_argument("--iters", type=int, default=None)
    r.add_argument("--workers", type=int, default=None)
    common(r)

    rep = sub.add_parser("report", help="refit rates from a results CSV")
    rep.add_argument("csv", nargs="?", default=None)
    rep.add_argument("--config", default=None, help="results CSV (alternative to the positional)")
    rep.add_argument("--burn-in", type=int, default=5)
    common(rep)
    return ap


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def cmd_generate(args) -> int:
    seed = 0 if args.seed is None else args.seed
    if args.family == "scaled-quadratic":
        c = parse_vector(args.curvatures, "--curvatures")
        x_star = None if args.minimizer is None else parse_vector(args.minimizer, "--minimizer")
        p = generate_scaled_quadratic(c, args.dim, x_star, seed=seed)
    elif args.family == "consistent-least-squares":
        p = generate_consistent_least_squares(args.n, args.p, args.rank, args.kappa, seed=seed)
    else:
        p = non_interpolating_fixture()
    write_problem(p, args.out)
    _say(args, f"wrote {p.family} problem (N={p.n_components}, P={p.dim}) to {args.out}")
    return 0


def _load_problem_or_config(path: Path):
    text = path.read_text(encoding="utf-8")
    if "[experiment]" in text:
        cfg = ExperimentConfig.from_text(text)
        return cfg.problem.build(path.parent), cfg.step
    return read_problem(path), None


def cmd_verify(args) -> int:
    problem, step = _load_problem_or_config(Path(args.config))
    if args.step is not None:
        step = StepSpec.parse(args.step, "--step")
    checks = verify_problem(problem, step, n_points=args.points, seed=0 if args.seed is None else args.seed)
    for c in checks:
        _say(args, f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.detail}")
    return 0 if all(c.ok for c in checks) else 1


def cmd_run(args) -> int:
    path = Path(args.config)
    cfg = ExperimentConfig.read(path)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.replicas is not None:
        overrides["replicas"] = args.replicas
    if args.iters is not None:
        overrides["iterations"] = args.iters
    if args.workers is not None:
        overrides["workers"] = args.workers
    cfg = replace(cfg, **overrides)
    out = args.out or cfg.output
    if out is None:
        raise UsageError("no output path: pass --out or set [output] path")
    report = run_experiment(cfg, base=path.parent)
    out = Path(out)
    emit_csv(report, out)
    out.with_suffix(".report").write_text(summary_text(report), encoding="utf-8")
    _say(args, summary_text(report).rstrip())
    return 0


def cmd_report(args) -> int:
    path = args.csv or args.config
    if path is None:
        raise UsageError("report needs a CSV path")
    for method, d in read_csv(path).items():
        rho = fitted_rate(d["mean_gap"], burn_in=args.burn_in)
        _say(args, f"{method} fitted_rate = {'none' if rho is None else repr(rho)}")
    return 0


COMMANDS = {"generate": cmd_generate, "verify": cmd_verify, "run": cmd_run, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
