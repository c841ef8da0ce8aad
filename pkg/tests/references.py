"""Independent references shared by the test modules."""

import numpy as np

from nonholo.integrator import integrate, rk4_step, step_times
from nonholo.scenarios import build, holonomic_rhs


def rk4_run(rhs, y0, t_end, dt):
    y = np.array(y0, dtype=float)
    times = step_times(t_end, dt)
    for i in range(1, times.size):
        y = rk4_step(rhs, times[i - 1], y, times[i] - times[i - 1])
    return y


def s3_closed_form(g: float):
    """Hand-reduced S3 with weight: uddot1 = -2 g u1 / (1 + 4 u1^2), uddot2 = 0."""

    def rhs(t, y):
        u1, u2 = y[3], y[4]
        return np.array([u1, u2, u1 * u1, -2.0 * g * u1 / (1.0 + 4.0 * u1 * u1), 0.0])

    return rhs


def holonomic_gap(name: str, t_end: float = 1.0, dt: float = 1e-2) -> float:
    """Max pointwise gap between the nonholonomic run and the substituted holonomic one."""
    sc = build(name)
    m = sc.model.m
    q0 = sc.initial.q
    offset = q0[m] - sc.holonomic_chart(q0[:m], 0.0)[2]
    traj = integrate(sc.model, "voronec", sc.initial, t_end, dt)
    rhs = holonomic_rhs(sc, offset)
    y = np.concatenate([q0[:m], sc.initial.u])
    times = step_times(t_end, dt)
    worst = 0.0
    for i, sample in enumerate(traj.samples):
        if i:
            y = rk4_step(rhs, times[i - 1], y, times[i] - times[i - 1])
        q_dep = sc.holonomic_chart(y[:m], offset)[2]
        expected = np.concatenate([y[:m], [q_dep], y[m:]])
        worst = max(worst, float(np.max(np.abs(np.concatenate([sample.state.q, sample.state.u]) - expected))))
    return worst
