"""Run configuration: INI-style files with optional command-line overrides.

A file holds up to five sections::

    [scenario]          # a built-in system ...
    id = nonlinear-quadratic
    gravity = 1

    [model]             # ... or an explicit one
    n = 3
    masses = 1
    chart = q1, q2, q3
    constraint = nonlinear          # or linear
    alpha = u1**2                   # k expressions separated by ";"
    coeffs = 0.5, 0                 # linear: k rows separated by ";"

    [forces]
    potential = -9.81 * q3

    [initial]
    q = 0, 0, 0
    u = 1, 0.5

    [run]
    formulation = voronec
    t_end = 1
    dt = 0.001
    seed = 0

Expressions may use ``q1..qn``, ``u1..um``, ``+ - * / **``, numeric
literals, ``pi``, ``e`` and ``sin cos tan exp log sqrt arctan``.
"""

from __future__ import annotations

import ast
import configparser
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import autodiff as ad
from .model import (
    ForceModel,
    GeneralizedState,
    LinearConstraints,
    NonlinearConstraints,
    SystemModel,
)
from .scenarios import SCENARIOS, Scenario, build


class ConfigError(ValueError):
    """Malformed configuration (exit status 2)."""

    category = "config"


FORMULATION_CHOICES = ("voronec", "voronec-direct", "caplygin", "appell", "oracle", "all")

_FUNCTIONS = {
    "sin": ad.sin,
    "cos": ad.cos,
    "tan": ad.tan,
    "exp": ad.exp,
    "log": ad.log,
    "sqrt": ad.sqrt,
    "arctan": ad.arctan,
}
_CONSTANTS = {"pi": math.pi, "e": math.e}
_ALLOWED_NODES = (
    ast.Expression,
    ast.Tuple,
    ast.BinOp,
    ast.UnaryOp,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
)


def compile_expression(text: str, names: set[str]):
    """Validate an arithmetic expression and return ``f(env) -> value``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ConfigError(f"unsupported syntax {type(node).__name__} in {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"only numeric literals are allowed in {text!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS or node.keywords:
                raise ConfigError(f"unsupported function call in {text!r}")
        if isinstance(node, ast.Name) and node.id not in names | set(_FUNCTIONS) | set(_CONSTANTS):
            raise ConfigError(f"unknown name {node.id!r} in {text!r}")
    code = compile(tree, "<config>", "eval")
    scope = {"__builtins__": {}, **_FUNCTIONS, **_CONSTANTS}

    def evaluate(env: dict):
        return eval(code, scope, env)  # noqa: S307 - AST whitelisted above

    return evaluate


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot read numbers for {what}: {text!r}") from None


def _env(q, u=None) -> dict:
    env = {f"q{i + 1}": q[i] for i in range(len(q))}
    if u is not None:
        env.update({f"u{i + 1}": u[i] for i in range(len(u))})
    return env


def model_from_section(cfg: configparser.ConfigParser) -> SystemModel:
    sec = cfg["model"]
    try:
        n = int(sec["n"])
        chart_text = sec["chart"]
        kind = sec.get("constraint", "nonlinear").strip().lower()
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[model] section incomplete or invalid: {exc}") from None
    masses = _floats(sec.get("masses", "1"), "masses")
    qnames = {f"q{i + 1}" for i in range(n)}
    chart_expr = compile_expression(chart_text, qnames)

    def chart(q):
        out = chart_expr(_env(q))
        return list(out) if isinstance(out, tuple) else [out]

    if kind == "linear":
        rows = [r for r in sec.get("coeffs", "").split(";") if r.strip()]
        k = len(rows)
        if k == 0:
            raise ConfigError("linear constraint needs 'coeffs'")
        exprs = [[compile_expression(x, qnames) for x in row.split(",")] for row in rows]
        m = n - k
        if any(len(row) != m for row in exprs):
            raise ConfigError(f"each coefficient row needs {m} entries")
        constraints = LinearConstraints(
            coeffs=lambda q: [[e(_env(q)) for e in row] for row in exprs], k=k, m=m
        )
    elif kind == "nonlinear":
        parts = [p for p in sec.get("alpha", "").split(";") if p.strip()]
        k = len(parts)
        if k == 0:
            raise ConfigError("nonlinear constraint needs 'alpha'")
        m = n - k
        names = qnames | {f"u{i + 1}" for i in range(m)}
        exprs = [compile_expression(p, names) for p in parts]
        constraints = NonlinearConstraints(alphas=lambda q, u: [e(_env(q, u)) for e in exprs], k=k, m=m)
    else:
        raise ConfigError(f"constraint must be 'linear' or 'nonlinear', got {kind!r}")

    forces = ForceModel()
    if cfg.has_section("forces") and cfg["forces"].get("potential"):
        pot = compile_expression(cfg["forces"]["potential"], qnames)
        forces = ForceModel(potential=lambda q: pot(_env(q)))
    if len(masses) == 1 and n > 0:
        # one mass value applies to every particle the chart produces
        probe = chart(np.zeros(n))
        masses = masses * max(1, len(probe) // 3)
    return SystemModel(masses=tuple(masses), chart=chart, constraints=constraints, n=n,
                       forces=forces, name=sec.get("name", "model-file"))


@dataclass
class RunConfig:
    scenario_id: Optional[str] = None
    model_file: Optional[str] = None
    scenario_params: dict = field(default_factory=dict)
    formulation: str = "voronec"
    q0: Optional[list] = None
    u0: Optional[list] = None
    t_end: float = 1.0
    dt: float = 0.01
    seed: int = 0
    samples: int = 200
    checks: list = field(default_factory=list)
    out_csv: Optional[str] = None
    out_json: Optional[str] = None
    _file: Optional[configparser.ConfigParser] = None

    def validate(self) -> None:
        if self.scenario_id is None and (self._file is None or not self._file.has_section("model")):
            raise ConfigError("either --scenario or a model file with a [model] or [scenario] section is required")
        if self.formulation not in FORMULATION_CHOICES:
            raise ConfigError(f"formulation must be one of {FORMULATION_CHOICES}")
        for name in ("t_end", "dt"):
            value = getattr(self, name)
            if not (isinstance(value, float) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name.replace('_', '-')} must be a positive number, got {value!r}")
        if not self.dt < self.t_end:
            raise ConfigError("dt must be smaller than t-end")
        if self.samples < 1:
            raise ConfigError("samples must be positive")

    def scenario(self) -> Scenario:
        """Resolve to a ``Scenario`` (a bare one for explicit models)."""
        if self.scenario_id is not None:
            return build(self.scenario_id, **self.scenario_params)
        model = model_from_section(self._file)
        rng_sampler = _generic_sampler(model.n, model.m)
        q0 = self.q0 if self.q0 is not None else [0.0] * model.n
        u0 = self.u0 if self.u0 is not None else [0.0] * model.m
        return Scenario(id=model.name, model=model, sampler=rng_sampler, initial=GeneralizedState(q0, u0))

    def initial_state(self, scenario: Scenario) -> GeneralizedState:
        q = self.q0 if self.q0 is not None else scenario.initial.q
        u = self.u0 if self.u0 is not None else scenario.initial.u
        state = GeneralizedState(q, u)
        state.check(scenario.model)
        return state


def _generic_sampler(n: int, m: int):
    def sample(rng):
        return GeneralizedState(rng.uniform(-1.0, 1.0, n), rng.uniform(-1.0, 1.0, m))

    return sample


_SCENARIO_PARAMS = {"gravity": "nonlinear-quadratic", "m1": "sleigh", "m2": "sleigh", "d": "sleigh"}


def load_file(path: str) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read model file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed model file: {exc}") from None
    return cfg


def _number(text: str, what: str, kind=float):
    try:
        return kind(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number, got {text!r}") from None


def from_sources(args) -> RunConfig:
    """Merge a model file (if any) with command-line flags; flags win."""
    rc = RunConfig()
    if getattr(args, "model_file", None):
        cfg = load_file(args.model_file)
        rc._file = cfg
        rc.model_file = args.model_file
        if cfg.has_section("scenario"):
            sec = cfg["scenario"]
            rc.scenario_id = sec.get("id")
            for key in ("gravity", "m1", "m2", "d"):
                if key in sec:
                    rc.scenario_params[key] = _number(sec[key], key)
        if cfg.has_section("initial"):
            if "q" in cfg["initial"]:
                rc.q0 = _floats(cfg["initial"]["q"], "initial q")
            if "u" in cfg["initial"]:
                rc.u0 = _floats(cfg["initial"]["u"], "initial u")
        if cfg.has_section("run"):
            run = cfg["run"]
            rc.formulation = run.get("formulation", rc.formulation)
            rc.t_end = _number(run.get("t_end", rc.t_end), "t_end")
            rc.dt = _number(run.get("dt", rc.dt), "dt")
            rc.seed = _number(run.get("seed", rc.seed), "seed", int)
            rc.samples = _number(run.get("samples", rc.samples), "samples", int)
            rc.out_csv = run.get("out_csv", rc.out_csv)
            rc.out_json = run.get("out_json", rc.out_json)

    if getattr(args, "scenario", None):
        rc.scenario_id = args.scenario
        rc.scenario_params = {k: v for k, v in rc.scenario_params.items() if _SCENARIO_PARAMS[k] == args.scenario}
    for flag, attr in (("formulation", "formulation"), ("t_end", "t_end"), ("dt", "dt"), ("seed", "seed"),
                       ("samples", "samples"), ("out_csv", "out_csv"), ("out_json", "out_json")):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(rc, attr, value)
    if getattr(args, "gravity", None) is not None:
        rc.scenario_params["gravity"] = args.gravity
    if getattr(args, "q0", None):
        rc.q0 = _floats(args.q0, "--q0")
    if getattr(args, "u0", None):
        rc.u0 = _floats(args.u0, "--u0")
    if getattr(args, "check", None):
        rc.checks = list(args.check)
    if rc.scenario_id is not None and rc.scenario_id not in SCENARIOS:
        raise ConfigError(f"unknown scenario {rc.scenario_id!r}; choose from {sorted(SCENARIOS)}")
    for key in list(rc.scenario_params):
        if rc.scenario_id is not None and _SCENARIO_PARAMS.get(key) != rc.scenario_id:
            raise ConfigError(f"parameter {key!r} does not apply to scenario {rc.scenario_id!r}")
    rc.t_end = float(rc.t_end)
    rc.dt = float(rc.dt)
    rc.validate()
    return rc
