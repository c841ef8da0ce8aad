"""Fixed-step classical RK4 on the reduced state ``(q, u)``.

Dependent velocities are reconstructed from the constraints at every stage
and never integrated, so the integrated system is an ODE and admissibility
of ``qdot`` holds exactly at every sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .appell import assemble_appell
from .errors import DivergenceError, ModelError, NonFiniteSystemError
from .geometry import energy
from .model import GeneralizedState, SystemModel, constraint_residual, full_velocity
from .oracle import solve_with_multipliers
from .voronec import (
    assemble_caplygin,
    assemble_voronec,
    assemble_voronec_direct,
    solve_accelerations,
)

_ASSEMBLERS = {
    "voronec": assemble_voronec,
    "voronec-direct": assemble_voronec_direct,
    "caplygin": assemble_caplygin,
    "appell": assemble_appell,
}
FORMULATION_NAMES = tuple(_ASSEMBLERS) + ("oracle",)


def accelerations(model: SystemModel, formulation: str, state: GeneralizedState, t: float = 0.0) -> np.ndarray:
    """Independent accelerations from the named formulation."""
    if formulation == "oracle":
        return solve_with_multipliers(model, state, t).qddot[: model.m]
    try:
        assemble = _ASSEMBLERS[formulation]
    except KeyError:
        raise ModelError(f"unknown formulation {formulation!r}") from None
    return solve_accelerations(assemble(model, state, t))


def derivative(model: SystemModel, formulation: str, state: GeneralizedState, t: float = 0.0):
    """``(qdot, udot)`` at ``state``."""
    return full_velocity(model, state), accelerations(model, formulation, state, t)


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_times(t_end: float, dt: float) -> np.ndarray:
    """Sample times ``0, dt, 2 dt, ...`` ending exactly at ``t_end``."""
    if not (dt > 0 and t_end > 0 and math.isfinite(dt) and math.isfinite(t_end)):
        raise ModelError("dt and t_end must be positive and finite")
    steps = max(1, math.ceil(t_end / dt - 1e-9))
    times = np.arange(steps + 1) * dt
    times[-1] = t_end
    return times


@dataclass(frozen=True)
class Sample:
    t: float
    state: GeneralizedState
    energy: float
    residual_norm: float
    formulation_gap: Optional[float] = None


@dataclass
class Trajectory:
    formulation: str
    samples: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def q(self) -> np.ndarray:
        return np.array([s.state.q for s in self.samples])

    @property
    def u(self) -> np.ndarray:
        return np.array([s.state.u for s in self.samples])

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.samples])

    def energy_drift(self) -> float:
        E = self.energies
        return float(np.max(np.abs(E - E[0])))

    def max_residual(self) -> float:
        return float(max(s.residual_norm for s in self.samples))


def _sample(model, state, t, gap=None) -> Sample:
    qdot = full_velocity(model, state)
    residual = float(np.linalg.norm(constraint_residual(model, state.q, qdot)))
    return Sample(t=float(t), state=state, energy=energy(model, state), residual_norm=residual, formulation_gap=gap)


def integrate(
    model: SystemModel,
    formulation: str,
    state0: GeneralizedState,
    t_end: float,
    dt: float,
    gap_against: Optional[str] = None,
) -> Trajectory:
    """Integrate with RK4; optionally record the acceleration gap to another formulation."""
    state0.check(model)
    n = model.n
    times = step_times(t_end, dt)

    def f(t, y):
        if not np.all(np.isfinite(y)):
            raise NonFiniteSystemError(f"non-finite stage state at t = {t}")
        state = GeneralizedState(y[:n], y[n:])
        qdot, udot = derivative(model, formulation, state, t)
        return np.concatenate([qdot, udot])

    def gap(state, t):
        if gap_against is None:
            return None
        a = accelerations(model, formulation, state, t)
        b = accelerations(model, gap_against, state, t)
        return float(np.max(np.abs(a - b)))

    traj = Trajectory(formulation=formulation)
    traj.samples.append(_sample(model, state0, 0.0, gap(state0, 0.0)))
    y = np.concatenate([state0.q, state0.u])
    for i in range(1, times.size):
        t0, h = times[i - 1], times[i] - times[i - 1]
        try:
            y = rk4_step(f, t0, y, h)
        except (NonFiniteSystemError, FloatingPointError) as exc:
            raise DivergenceError(f"non-finite derivative after t = {t0}: {exc}", traj.samples[-1]) from exc
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"non-finite state at t = {times[i]}", traj.samples[-1])
        state = GeneralizedState(y[:n], y[n:])
        traj.samples.append(_sample(model, state, times[i], gap(state, times[i])))
    return traj


@dataclass(frozen=True)
class FormulationReport:
    formulations: tuple
    max_state_gap: float
    max_acceleration_gap: float
    energy_drift: dict
    trajectories: dict
    # per-sample max acceleration gap along the first formulation's trajectory
    acceleration_gaps: tuple = ()

    def summary(self) -> dict:
        return {
            "formulations": list(self.formulations),
            "max_state_gap": self.max_state_gap,
            "max_acceleration_gap": self.max_acceleration_gap,
            "energy_drift": dict(self.energy_drift),
        }


def compare_formulations(
    model: SystemModel,
    state0: GeneralizedState,
    t_end: float,
    dt: float,
    formulations=("voronec", "appell", "oracle"),
) -> FormulationReport:
    """Integrate each formulation from the same initial data and report the gaps."""
    trajectories = {name: integrate(model, name, state0, t_end, dt) for name in formulations}
    ref = trajectories[formulations[0]]
    ref_y = np.hstack([ref.q, ref.u])
    state_gap = 0.0
    for name in formulations[1:]:
        tr = trajectories[name]
        state_gap = max(state_gap, float(np.max(np.abs(np.hstack([tr.q, tr.u]) - ref_y))))
    gaps = []
    for sample in ref.samples:
        accs = [accelerations(model, name, sample.state, sample.t) for name in formulations]
        gaps.append(max((float(np.max(np.abs(a - accs[0]))) for a in accs[1:]), default=0.0))
    drift = {name: tr.energy_drift() for name, tr in trajectories.items()}
    return FormulationReport(
        formulations=tuple(formulations),
        max_state_gap=state_gap,
        max_acceleration_gap=max(gaps),
        energy_drift=drift,
        trajectories=trajectories,
        acceleration_gaps=tuple(gaps),
    )
