"""Command-line front-end: ``nonholo simulate`` and ``nonholo verify``.

Exit status: 0 success, 1 a verification check failed, 2 configuration
error, 3 model error, 4 numerical failure.  Errors are also reported on
stderr as one JSON object ``{"error": <category>, "message": ...}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .checks import CHECKS, default_checks, run_checks
from .config import FORMULATION_CHOICES, ConfigError, from_sources
from .errors import NonholoError
from .integrator import compare_formulations, integrate

EXIT_CODES = {"config": 2, "model": 3, "numerical": 4}
ALL_FORMULATIONS = ("voronec", "voronec-direct", "appell", "oracle")


def fmt(x) -> str:
    if x is None:
        return "nan"
    return "%.17g" % x


def trajectory_csv(traj, gaps=None) -> str:
    n = traj.samples[0].state.q.size
    m = traj.samples[0].state.u.size
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"q{i + 1}" for i in range(n)] + [f"u{i + 1}" for i in range(m)] + ["E", "residual", "gap"])
    for idx, s in enumerate(traj.samples):
        gap = gaps[idx] if gaps is not None else s.formulation_gap
        row = [s.t, *s.state.q, *s.state.u, s.energy, s.residual_norm, gap]
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.floating):
        return _json_safe(float(obj))
    return obj


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_simulate(args) -> int:
    rc = from_sources(args)
    scenario = rc.scenario()
    model = scenario.model
    if rc.formulation == "caplygin" and not model.constraints.linear:
        raise ConfigError("the caplygin formulation requires linear constraints")
    state0 = rc.initial_state(scenario)
    report = {
        "scenario": scenario.id,
        "formulation": rc.formulation,
        "t_end": rc.t_end,
        "dt": rc.dt,
        "seed": rc.seed,
    }
    if rc.formulation == "all":
        cmp = compare_formulations(model, state0, rc.t_end, rc.dt, ALL_FORMULATIONS)
        traj = cmp.trajectories[ALL_FORMULATIONS[0]]
        gaps = cmp.acceleration_gaps
        report.update(cmp.summary())
    else:
        traj = integrate(model, rc.formulation, state0, rc.t_end, rc.dt)
        gaps = None
        report["energy_drift"] = traj.energy_drift()
    final = traj.samples[-1]
    report.update(
        {
            "samples": len(traj.samples),
            "max_residual": traj.max_residual(),
            "final_q": list(final.state.q),
            "final_u": list(final.state.u),
            "final_energy": final.energy,
        }
    )
    _write(rc.out_csv, trajectory_csv(traj, gaps))
    payload = json.dumps(_json_safe(report), indent=2, sort_keys=True) + "\n"
    if rc.out_json is not None:
        _write(rc.out_json, payload)
    return 0


def cmd_verify(args) -> int:
    rc = from_sources(args)
    scenario = rc.scenario()
    names = rc.checks or default_checks(scenario)
    results = run_checks(scenario, names, rc.samples, rc.seed)
    lines = [f"scenario {scenario.id}: {rc.samples} samples, seed {rc.seed}"]
    lines += [r.line() for r in results]
    print("\n".join(lines))
    if rc.out_json is not None:
        payload = {
            "scenario": scenario.id,
            "samples": rc.samples,
            "seed": rc.seed,
            "checks": [
                {"name": r.name, "max_violation": r.max_violation, "tolerance": r.tolerance,
                 "passed": r.passed, "note": r.note}
                for r in results
            ],
        }
        _write(rc.out_json, json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")
    return 0 if all(r.passed for r in results) else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="built-in scenario id")
    p.add_argument("--model-file", help="INI-style configuration / model file")
    p.add_argument("--seed", type=int)
    p.add_argument("--gravity", type=float, help="gravity for nonlinear-quadratic")
    p.add_argument("--q0", help="initial coordinates, comma separated")
    p.add_argument("--u0", help="initial independent velocities, comma separated")
    p.add_argument("--out-json")
    p.add_argument("--formulation", choices=FORMULATION_CHOICES)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonholo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a system and write trajectory CSV / diagnostics JSON")
    _add_common(sim)
    sim.add_argument("--out-csv", help="trajectory CSV path (default: stdout)")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run property checks on sampled admissible states")
    _add_common(ver)
    ver.add_argument("--samples", type=int)
    ver.add_argument("--check", action="append", choices=sorted(CHECKS))
    ver.set_defaults(func=cmd_verify)
    return parser


def _fail(category: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": category, "message": message}) + "\n")
    return EXIT_CODES[category]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("config", str(exc))
    except NonholoError as exc:
        return _fail(exc.category, str(exc))
    except np.linalg.LinAlgError as exc:
        return _fail("numerical", str(exc))


if __name__ == "__main__":
    sys.exit(main())
