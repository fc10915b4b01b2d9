"""Key-value text files for problems and experiment configs.

Both are INI-style: ``[section]`` headers, one ``key = value`` per line,
``#`` comments, UTF-8. Vectors are comma-separated floats written with
``repr`` so they parse back bit-identical.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..objective import ConsistentLeastSquaresObjective, LeastSquaresObjective, ScaledQuadraticObjective
from ..optimizers import METHODS
from ..problems import (
    CONSISTENT_LEAST_SQUARES,
    LEAST_SQUARES,
    SCALED_QUADRATIC,
    ProblemInstance,
    generate_consistent_least_squares,
    generate_scaled_quadratic,
)
from ..rng import MASK64


class ConfigError(ValueError):
    """A config or problem file is malformed; ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def format_float(v: float) -> str:
    return repr(float(v))


def format_vector(v) -> str:
    return ", ".join(format_float(x) for x in np.asarray(v).reshape(-1))


def parse_vector(text: str, where: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip()], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(where, f"not a list of numbers: {text!r}") from exc


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                   comment_prefixes=("#",))
    cp.optionxform = str
    return cp


def _dump(cp: configparser.ConfigParser) -> str:
    buf = io.StringIO()
    cp.write(buf, space_around_delimiters=True)
    return buf.getvalue().rstrip("\n") + "\n"


def _get(section, key, where, conv=str, default=...):
    name = f"{where}.{key}"
    if key not in section:
        if default is ...:
            raise ConfigError(name, "missing")
        return default
    raw = section[key].strip()
    try:
        value = conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"cannot parse {raw!r}") from exc
    return value


def _seed(raw: str) -> int:
    v = int(raw, 0)
    if not 0 <= v <= MASK64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return v


# -- problem specs and files -------------------------------------------------

@dataclass
class ProblemSpec:
    """Either generator parameters for ``family`` or a path to a problem file."""

    family: str | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    file: str | None = None

    def build(self, base: Path | None = None) -> ProblemInstance:
        if self.file is not None:
            path = Path(self.file)
            if base is not None and not path.is_absolute():
                path = base / path
            return read_problem(path)
        if self.family == SCALED_QUADRATIC:
            return generate_scaled_quadratic(self.params["curvatures"], self.params.get("dimension", 1),
                                             self.params.get("minimizer"), seed=self.seed)
        if self.family == CONSISTENT_LEAST_SQUARES:
            pr = self.params
            return generate_consistent_least_squares(pr["n"], pr["p"], pr.get("rank"), pr.get("kappa", 10.0),
                                                     seed=self.seed, sigma_max=pr.get("sigma_max"))
        raise ConfigError("problem.family", f"unknown family {self.family!r}")


_QUAD_KEYS = {"curvatures": lambda s: list(parse_vector(s, "problem.curvatures")),
              "dimension": int,
              "minimizer": lambda s: list(parse_vector(s, "problem.minimizer"))}
_LSQ_KEYS = {"n": int, "p": int, "rank": int, "kappa": float, "sigma_max": float}


def _problem_spec_from_section(sec) -> ProblemSpec:
    if "file" in sec:
        return ProblemSpec(file=sec["file"].strip())
    family = _get(sec, "family", "problem")
    if family == SCALED_QUADRATIC:
        keys = _QUAD_KEYS
        required = ("curvatures",)
    elif family == CONSISTENT_LEAST_SQUARES:
        keys = _LSQ_KEYS
        required = ("n", "p")
    else:
        raise ConfigError("problem.family", f"unknown family {family!r}")
    params = {}
    for key, conv in keys.items():
        if key in sec or key in required:
            params[key] = _get(sec, key, "problem", conv)
    for key in sec:
        if key not in keys and key not in ("family", "seed"):
            raise ConfigError(f"problem.{key}", "unknown key")
    return ProblemSpec(family, params, _get(sec, "seed", "problem", _seed, 0))


def _problem_spec_to_section(spec: ProblemSpec) -> dict:
    if spec.file is not None:
        return {"file": spec.file}
    out = {"family": spec.family, "seed": str(spec.seed)}
    for key, value in spec.params.items():
        if value is None:
            continue
        if isinstance(value, (list, tuple, np.ndarray)):
            out[key] = format_vector(value)
        elif isinstance(value, float):
            out[key] = format_float(value)
        else:
            out[key] = str(value)
    return out


def problem_to_text(p: ProblemInstance) -> str:
    cp = _parser()
    head = {"family": p.family, "seed": str(p.seed),
            "n_components": str(p.n_components), "dimension": str(p.dim)}
    for key, value in p.params.items():
        head[key] = format_float(value) if isinstance(value, float) else str(value)
    cp["problem"] = head
    data = {"x_star": format_vector(p.x_star), "f_star": format_float(p.f_star)}
    obj = p.objective
    if isinstance(obj, ScaledQuadraticObjective):
        data["curvatures"] = format_vector(obj.curvatures)
    elif isinstance(obj, LeastSquaresObjective):
        for i, row in enumerate(obj.A):
            data[f"a.{i}"] = format_vector(row)
        if not isinstance(obj, ConsistentLeastSquaresObjective):
            data["b"] = format_vector(obj.b)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    cp["data"] = data
    return _dump(cp)


def write_problem(p: ProblemInstance, path) -> None:
    Path(path).write_text(problem_to_text(p), encoding="utf-8")


def problem_from_text(text: str) -> ProblemInstance:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("problem", str(exc)) from exc
    for sec in ("problem", "data"):
        if sec not in cp:
            raise ConfigError(sec, "missing section")
    head, data = cp["problem"], cp["data"]
    family = _get(head, "family", "problem")
    seed = _get(head, "seed", "problem", _seed, 0)
    n = _get(head, "n_components", "problem", int)
    dim = _get(head, "dimension", "problem", int)
    x_star = parse_vector(_get(data, "x_star", "data"), "data.x_star")
    f_star = _get(data, "f_star", "data", float)
    params = {}
    for key in head:
        if key in ("family", "seed", "n_components", "dimension"):
            continue
        raw = head[key]
        try:
            params[key] = int(raw)
        except ValueError:
            params[key] = float(raw)
    if x_star.shape[0] != dim:
        raise ConfigError("data.x_star", f"expected {dim} entries")
    if family == SCALED_QUADRATIC:
        c = parse_vector(_get(data, "curvatures", "data"), "data.curvatures")
        if c.shape[0] != n:
            raise ConfigError("data.curvatures", f"expected {n} entries")
        obj = ScaledQuadraticObjective(c, x_star)
        params = {"dimension": dim}
    elif family in (CONSISTENT_LEAST_SQUARES, LEAST_SQUARES):
        rows = []
        for i in range(n):
            row = parse_vector(_get(data, f"a.{i}", "data"), f"data.a.{i}")
            if row.shape[0] != dim:
                raise ConfigError(f"data.a.{i}", f"expected {dim} entries")
            rows.append(row)
        A = np.array(rows)
        if family == CONSISTENT_LEAST_SQUARES:
            obj = ConsistentLeastSquaresObjective(A, x_star)
        else:
            obj = LeastSquaresObjective(A, parse_vector(_get(data, "b", "data"), "data.b"))
    else:
        raise ConfigError("problem.family", f"unknown family {family!r}")
    return ProblemInstance(obj, x_star, f_star, family, seed, params)


def read_problem(path) -> ProblemInstance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read problem file {path}: {exc}") from exc
    return problem_from_text(text)


# -- step sizes ----------------------------------------------------------------

STEP_KINDS = ("value", "reference", "half-max", "out-of-window")


@dataclass(frozen=True)
class StepSpec:
    """``reference`` = 1/(L B^2), ``half-max`` = half of 2/(L B^2),
    ``out-of-window`` = multiplier * 2/(L B^2), ``value`` = literal alpha."""

    kind: str = "reference"
    value: float | None = None

    @classmethod
    def parse(cls, text: str, where: str = "experiment.step") -> "StepSpec":
        text = text.strip()
        if text in ("reference", "half-max"):
            return cls(text)
        if text.startswith("out-of-window"):
            _, _, m = text.partition(":")
            try:
                return cls("out-of-window", float(m))
            except ValueError as exc:
                raise ConfigError(where, "expected out-of-window:<multiplier>") from exc
        try:
            v = float(text)
        except ValueError as exc:
            raise ConfigError(where, f"unrecognized step size {text!r}") from exc
        if not v > 0 or not np.isfinite(v):
            raise ConfigError(where, "step size must be positive and finite")
        return cls("value", v)

    def __str__(self):
        if self.kind == "value":
            return format_float(self.value)
        if self.kind == "out-of-window":
            return f"out-of-window:{format_float(self.value)}"
        return self.kind

    def resolve(self, L: float, B: float) -> float:
        max_step = 2.0 / (L * B * B)
        if self.kind == "value":
            return self.value
        if self.kind == "reference":
            return 1.0 / (L * B * B)
        if self.kind == "half-max":
            return 0.5 * max_step
        return self.value * max_step


# -- experiment configs --------------------------------------------------------

@dataclass
class ExperimentConfig:
    problem: ProblemSpec
    methods: tuple = ("sgd",)
    step: StepSpec = field(default_factory=StepSpec)
    replicas: int = 1
    iterations: int = 100
    seed: int = 0
    x0: str = "ones"
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("experiment.methods", f"unknown method {m!r}")
        if not self.methods:
            raise ConfigError("experiment.methods", "empty")
        if self.replicas < 1:
            raise ConfigError("experiment.replicas", "must be >= 1")
        if self.iterations < 0:
            raise ConfigError("experiment.iterations", "must be >= 0")
        if self.workers < 1:
            raise ConfigError("experiment.workers", "must be >= 1")

    def initial_point(self, p: ProblemInstance) -> np.ndarray:
        if self.x0 == "ones":
            return np.ones(p.dim)
        if self.x0 == "zeros":
            return np.zeros(p.dim)
        v = parse_vector(self.x0, "experiment.x0")
        if v.shape[0] == 1 and p.dim > 1:
            v = np.full(p.dim, v[0])
        if v.shape[0] != p.dim:
            raise ConfigError("experiment.x0", f"expected {p.dim} entries")
        return v

    def to_text(self) -> str:
        cp = _parser()
        cp["problem"] = _problem_spec_to_section(self.problem)
        cp["experiment"] = {
            "methods": ", ".join(self.methods),
            "step": str(self.step),
            "replicas": str(self.replicas),
            "iterations": str(self.iterations),
            "seed": str(self.seed),
            "x0": self.x0,
            "workers": str(self.workers),
        }
        if self.output is not None:
            cp["output"] = {"path": self.output}
        return _dump(cp)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        cp = _parser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("config", str(exc)) from exc
        for sec in ("problem", "experiment"):
            if sec not in cp:
                raise ConfigError(sec, "missing section")
        ex = cp["experiment"]
        known = {"methods", "step", "replicas", "iterations", "seed", "x0", "workers"}
        for key in ex:
            if key not in known:
                raise ConfigError(f"experiment.{key}", "unknown key")
        methods = tuple(m.strip() for m in _get(ex, "methods", "experiment").split(",") if m.strip())
        step = StepSpec.parse(_get(ex, "step", "experiment", default="reference"))
        x0 = _get(ex, "x0", "experiment", default="ones")
        if x0 not in ("ones", "zeros"):
            parse_vector(x0, "experiment.x0")
        output = cp["output"].get("path") if "output" in cp else None
        return cls(
            problem=_problem_spec_from_section(cp["problem"]),
            methods=methods,
            step=step,
            replicas=_get(ex, "replicas", "experiment", int, 1),
            iterations=_get(ex, "iterations", "experiment", int, 100),
            seed=_get(ex, "seed", "experiment", _seed, 0),
            x0=x0,
            workers=_get(ex, "workers", "experiment", int, 1),
            output=output.strip() if output else None,
        )

    @classmethod
    def read(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")
