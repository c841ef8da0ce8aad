"""Built-in systems with admissible-state samplers and hand-checked reference facts.

=====================  ===================================================
id                     system
=====================  ===================================================
free-linear            particle in R^3, ``qdot3 = 0.5 qdot1``
sleigh                 two linked masses, knife edge at P1, q = (x, th, y)
nonlinear-quadratic    particle in R^3, ``qdot3 = qdot1**2``, gravity
nonlinear-coupled      unit masses on R^4, ``qdot4 = qdot1 * qdot2``
integrable-product     particle in R^3, ``qdot3 = q2 qdot1 + q1 qdot2``
=====================  ===================================================

The sleigh's ``tan(th)`` parametrization degenerates at ``th = +-pi/2``; its
sampler stays in ``|th| < pi/2 - 0.1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import autodiff as ad
from .errors import ModelError
from .model import (
    ForceModel,
    GeneralizedState,
    LinearConstraints,
    NonlinearConstraints,
    SystemModel,
)

SLEIGH_BAND = math.pi / 2 - 0.1


@dataclass(frozen=True)
class Scenario:
    id: str
    model: SystemModel
    sampler: Callable[[np.random.Generator], GeneralizedState]
    initial: GeneralizedState
    reference_facts: dict = field(default_factory=dict)
    integrable: bool = False
    # substituted holonomic chart (q_ind -> X) for integrable constraints
    holonomic_chart: Callable | None = None

    def samples(self, count: int, seed: int = 0) -> list[GeneralizedState]:
        rng = np.random.default_rng(seed)
        return [self.sampler(rng) for _ in range(count)]


def _uniform_state(n: int, m: int, q_scale: float = 1.0, u_scale: float = 1.0):
    def sample(rng: np.random.Generator) -> GeneralizedState:
        return GeneralizedState(rng.uniform(-q_scale, q_scale, n), rng.uniform(-u_scale, u_scale, m))

    return sample


def _identity_chart(q):
    return [q[0], q[1], q[2]]


def s1_free_linear() -> Scenario:
    """Integrable constant-coefficient constraint ``qdot3 = 0.5 qdot1`` (f = 0.5 q1)."""
    model = SystemModel(
        masses=(1.0,),
        chart=_identity_chart,
        constraints=LinearConstraints(coeffs=lambda q: [[0.5, 0.0]], k=1, m=2),
        n=3,
        name="free-linear",
    )
    return Scenario(
        id="free-linear",
        model=model,
        sampler=_uniform_state(3, 2, 2.0, 2.0),
        initial=GeneralizedState([0.0, 0.0, 0.0], [2.0, 1.0]),
        reference_facts={
            "mass_red": ([[1.25, 0.0], [0.0, 1.0]], "hand-derived: T* = (u1^2 + u2^2 + 0.25 u1^2) / 2"),
            "uddot": ([0.0, 0.0], "by inspection: free straight-line motion"),
            "beta": (0.0, "by inspection: constant coefficients"),
        },
        integrable=True,
        holonomic_chart=lambda q, offset: [q[0], q[1], 0.5 * q[0] + offset],
    )


def s2_chaplygin_sleigh(m1: float = 1.0, m2: float = 1.0, d: float = 1.0) -> Scenario:
    """Two point masses rigidly linked at distance ``d``; knife edge at ``P1``.

    ``P1 = (x, y)``, ``P2 = (x + d cos th, y + d sin th)``; the lateral
    velocity of ``P1`` vanishes, ``ydot = tan(th) xdot``.
    """
    if d <= 0:
        raise ModelError("sleigh arm length must be positive")

    def chart(q):
        x, th, y = q[0], q[1], q[2]
        return [x, y, 0.0, x + d * ad.cos(th), y + d * ad.sin(th), 0.0]

    model = SystemModel(
        masses=(m1, m2),
        chart=chart,
        constraints=LinearConstraints(coeffs=lambda q: [[ad.tan(q[1]), 0.0]], k=1, m=2),
        n=3,
        name="sleigh",
    )

    def sample(rng: np.random.Generator) -> GeneralizedState:
        x, y = rng.uniform(-2.0, 2.0, 2)
        th = rng.uniform(-SLEIGH_BAND, SLEIGH_BAND)
        return GeneralizedState([x, th, y], rng.uniform(-1.0, 1.0, 2))

    return Scenario(
        id="sleigh",
        model=model,
        sampler=sample,
        initial=GeneralizedState([0.0, 0.1, 0.0], [1.0, 0.5]),
        reference_facts={
            "g": ("g_xx = m1+m2, g_xth = -m2 d sin th, g_yth = m2 d cos th, g_thth = m2 d^2", "hand-derived"),
            "beta_12": ("sec^2 th", "hand-derived: hand differentiation"),
            "singular_band": (SLEIGH_BAND, "declared exclusion |th| >= pi/2 - 0.1"),
        },
    )


def s3_nonlinear_quadratic(gravity: float = 0.0) -> Scenario:
    """Genuinely nonlinear constraint ``qdot3 = qdot1**2``; optional weight ``(0, 0, -gravity)``."""
    forces = ForceModel(potential=(lambda q: -gravity * q[2])) if gravity else ForceModel()
    model = SystemModel(
        masses=(1.0,),
        chart=_identity_chart,
        constraints=NonlinearConstraints(alphas=lambda q, u: [u[0] * u[0]], k=1, m=2),
        n=3,
        forces=forces,
        name="nonlinear-quadratic",
    )
    return Scenario(
        id="nonlinear-quadratic",
        model=model,
        sampler=_uniform_state(3, 2, 2.0, 2.0),
        initial=GeneralizedState([0.0, 0.0, 0.0], [1.0, 0.5]),
        reference_facts={
            "uddot1": ("-2 gravity u1 / (1 + 4 u1^2)", "hand-derived: multiplier elimination"),
            "lambda": ("-gravity / (1 + 4 u1^2)", "hand-derived: multiplier elimination"),
            "B1": ([[2.0, 0.0], [0.0, 0.0]], "by inspection"),
        },
    )


def s4_nonlinear_coupled() -> Scenario:
    """``qdot4 = qdot1 qdot2`` on R^4, embedded as two unit masses ``(q1, q2, q3)`` and ``(q4, 0, 0)``."""
    model = SystemModel(
        masses=(1.0, 1.0),
        chart=lambda q: [q[0], q[1], q[2], q[3], 0.0, 0.0],
        constraints=NonlinearConstraints(alphas=lambda q, u: [u[0] * u[1]], k=1, m=3),
        n=4,
        name="nonlinear-coupled",
    )
    return Scenario(
        id="nonlinear-coupled",
        model=model,
        sampler=_uniform_state(4, 3, 2.0, 2.0),
        initial=GeneralizedState([0.0, 0.0, 0.0, 0.0], [1.0, 0.5, -0.3]),
        reference_facts={
            "B1_12": (1.0, "by inspection"),
            "mass_red": ("I + w w^T, w = (u2, u1, 0)", "hand-derived: hand assembly of C"),
        },
    )


def s5_integrable_nonconstant() -> Scenario:
    """``qdot3 = q2 qdot1 + q1 qdot2``, the differential of ``q3 = q1 q2``."""
    model = SystemModel(
        masses=(1.0,),
        chart=_identity_chart,
        constraints=LinearConstraints(coeffs=lambda q: [[q[1], q[0]]], k=1, m=2),
        n=3,
        name="integrable-product",
    )
    return Scenario(
        id="integrable-product",
        model=model,
        sampler=_uniform_state(3, 2, 1.5, 1.5),
        initial=GeneralizedState([0.5, -0.3, -0.15], [0.4, 0.7]),
        reference_facts={"beta": (0.0, "hand-derived: curl of grad(q1 q2) vanishes")},
        integrable=True,
        holonomic_chart=lambda q, offset: [q[0], q[1], q[0] * q[1] + offset],
    )


def caplygin_example() -> Scenario:
    """Nonintegrable ``qdot3 = q2 qdot1`` on a free particle.

    Coefficients depend on an independent coordinate only and the metric is
    flat, so nothing depends on the dependent coordinate ``q3``.
    """
    model = SystemModel(
        masses=(1.0,),
        chart=_identity_chart,
        constraints=LinearConstraints(coeffs=lambda q: [[q[1], 0.0]], k=1, m=2),
        n=3,
        name="caplygin-example",
    )
    return Scenario(
        id="caplygin-example",
        model=model,
        sampler=_uniform_state(3, 2, 2.0, 2.0),
        initial=GeneralizedState([0.0, 0.5, 0.0], [1.0, 0.2]),
    )


SCENARIOS = {
    "free-linear": s1_free_linear,
    "sleigh": s2_chaplygin_sleigh,
    "nonlinear-quadratic": s3_nonlinear_quadratic,
    "nonlinear-coupled": s4_nonlinear_coupled,
    "integrable-product": s5_integrable_nonconstant,
}


def build(scenario_id: str, **params) -> Scenario:
    try:
        factory = SCENARIOS[scenario_id]
    except KeyError:
        raise ModelError(f"unknown scenario {scenario_id!r}; choose from {sorted(SCENARIOS)}") from None
    return factory(**params)


def holonomic_rhs(scenario: Scenario, offset: float):
    """Right-hand side of the unconstrained system obtained by substituting an
    integrable constraint into the chart.

    The state is ``(q_ind, qdot_ind)``; accelerations come from
    ``g qddot = -h`` with ``g`` and ``h`` built from the substituted chart's
    jets.  Used as an independent check of the nonholonomic machinery.
    """
    if scenario.holonomic_chart is None:
        raise ModelError(f"scenario {scenario.id!r} has no holonomic substitution")
    masses = scenario.model.particle_masses
    m = scenario.model.m

    def rhs(t, y):
        q, qdot = y[:m], y[m:]
        _, J, H = ad.vector_jet(lambda qs: scenario.holonomic_chart(qs, offset), q)
        g = (masses[:, None] * J).T @ J
        h = J.T @ (masses * np.einsum("cab,a,b->c", H, qdot, qdot))
        return np.concatenate([qdot, np.linalg.solve(g, -h)])

    return rhs
