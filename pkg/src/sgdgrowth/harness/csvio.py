"""CSV results: ``k,method,mean_gap,stderr,bound,alpha,L,mu,B``.

Floats are written with ``repr`` (shortest string that parses back equal);
infinities as ``inf``; a missing bound as the empty string.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .config import format_float
from .experiment import ExperimentReport

HEADER = ["k", "method", "mean_gap", "stderr", "bound", "alpha", "L", "mu", "B"]


def _cell(v) -> str:
    v = float(v)
    if math.isnan(v):
        return ""
    return format_float(v)


def emit_csv(report: ExperimentReport, path) -> None:
    c = report.constants
    tail = [_cell(report.alpha), _cell(c.L), _cell(c.mu), _cell(c.B)]
    rows = []
    for method, res in report.results.items():
        for k in range(res.mean_gap.shape[0]):
            bound = "" if res.bound is None else _cell(res.bound[k])
            rows.append([str(k), method, _cell(res.mean_gap[k]), _cell(res.stderr[k]), bound] + tail)
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADER)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path) -> dict:
    """Columns per method: {'k', 'mean_gap', 'stderr', 'bound'} arrays plus the constants."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        out = {}
        for row in reader:
            k, method, mean, se, bound, alpha, L, mu, B = row
            d = out.setdefault(method, {"k": [], "mean_gap": [], "stderr": [], "bound": [],
                                        "alpha": float(alpha), "L": float(L), "mu": float(mu), "B": float(B)})
            d["k"].append(int(k))
            d["mean_gap"].append(float(mean))
            d["stderr"].append(float(se))
            d["bound"].append(float(bound) if bound else np.nan)
    for d in out.values():
        for key in ("k", "mean_gap", "stderr", "bound"):
            d[key] = np.array(d[key])
    return out


def summary_text(report: ExperimentReport) -> str:
    """Human-readable key-value summary written next to the CSV."""
    c = report.constants
    lines = ["[constants]", f"L = {format_float(c.L)}", f"mu = {format_float(c.mu)}",
             f"B = {format_float(c.B)}", f"alpha = {format_float(report.alpha)}",
             f"in_window = {str(report.in_window).lower()}",
             f"initial_gap = {format_float(report.initial_gap)}",
             f"initial_dist = {format_float(report.initial_dist)}",
             f"replicas = {report.replicas}", f"iterations = {report.iterations}"]
    for method, res in report.results.items():
        lines += ["", f"[{method}]",
                  f"bound = {res.bound_kind or 'none'}",
                  f"fitted_rate = {'none' if res.fitted_rate is None else format_float(res.fitted_rate)}",
                  f"violations = {res.violations}",
                  f"diverged_replicas = {len(res.diverged)}"]
    return "\n".join(lines) + "\n"
