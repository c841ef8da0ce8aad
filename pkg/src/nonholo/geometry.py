"""Mass geometry of the chart: metric, second-derivative tensor and energies."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import autodiff as ad
from .errors import DegenerateChartError
from .model import GeneralizedState, SystemModel, full_velocity


@lru_cache(maxsize=256)
def _jet_cached(model: SystemModel, key: bytes):
    q = np.frombuffer(key, dtype=float)
    X, J, H = ad.vector_jet(model.positions, q)
    for arr in (X, J, H):
        arr.setflags(write=False)
    return X, J, H


def chart_jet(model: SystemModel, q) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Positions ``(3N,)``, first ``(3N, n)`` and second ``(3N, n, n)`` chart derivatives.

    Memoized on the exact bytes of ``q``; every integrator stage produces a new
    ``q`` so nothing is reused across steps.
    """
    q = np.ascontiguousarray(q, dtype=float)
    return _jet_cached(model, q.tobytes())


def mass_metric(model: SystemModel, q, check: bool = True) -> np.ndarray:
    """``g[i, j] = sum_p m_p dP_p/dq_i . dP_p/dq_j`` with a positive-definiteness check."""
    _, J, _ = chart_jet(model, q)
    mJ = model.particle_masses[:, None] * J
    g = mJ.T @ J
    if check:
        _check_spd(g)
    return g


def _check_spd(g: np.ndarray) -> None:
    n = g.shape[0]
    tol = 1e-12 * np.trace(g) / n
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DegenerateChartError("mass metric is not positive definite; the chart is not an immersion") from None
    pivots = np.diag(L) ** 2
    if not np.all(pivots > tol):
        raise DegenerateChartError(
            f"mass metric pivot {pivots.min():.3e} below tolerance {tol:.3e}; the chart is not an immersion"
        )


def xi_tensor(model: SystemModel, q) -> np.ndarray:
    """``xi[i, j, k] = sum_p m_p d2P_p/dq_i dq_j . dP_p/dq_k``."""
    _, J, H = chart_jet(model, q)
    return np.einsum("c,cij,ck->ijk", model.particle_masses, H, J)


def metric_derivative(model: SystemModel, q) -> np.ndarray:
    """``dg[i, j, c] = d g_ij / d q_c = xi[i, c, j] + xi[j, c, i]``."""
    xi = xi_tensor(model, q)
    return np.einsum("icj->ijc", xi) + np.einsum("jci->ijc", xi)


def kinetic_energy(model: SystemModel, q, qdot) -> float:
    qdot = np.asarray(qdot, dtype=float)
    return 0.5 * float(qdot @ mass_metric(model, q, check=False) @ qdot)


def kinetic_energy_direct(model: SystemModel, q, qdot) -> float:
    """``1/2 sum m |dP/dt|^2`` from a directional derivative of the chart.

    Independent of the metric route: the chart is pushed forward along
    ``qdot`` with a single-seed dual.
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    path = np.array([ad.Dual1(q[i], np.array([qdot[i]])) for i in range(q.size)], dtype=object)
    Pdot = np.array([x.grad[0] if isinstance(x, ad.Dual1) else 0.0 for x in model.positions(path)])
    return 0.5 * float(np.sum(model.particle_masses * Pdot**2))


def reduced_kinetic_energy(model: SystemModel, state: GeneralizedState) -> float:
    """Kinetic energy with the dependent velocities substituted."""
    return kinetic_energy(model, state.q, full_velocity(model, state))


def potential(model: SystemModel, q) -> float:
    pot = model.forces.potential
    return 0.0 if pot is None else ad.value_of(pot(np.asarray(q, dtype=float)))


def energy(model: SystemModel, state: GeneralizedState) -> float:
    """``T* - U``; ``nan`` when the force model is not conservative."""
    forces = model.forces
    if not forces.conservative or forces.time_dependent:
        return math.nan
    return reduced_kinetic_energy(model, state) - potential(model, state.q)


def generalized_force(model: SystemModel, q, qdot, t: float = 0.0) -> np.ndarray:
    """Total generalized force: potential gradient, applied and projected Cartesian parts."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    forces = model.forces
    F = np.zeros(model.n)
    if forces.potential is not None:
        F += ad.gradient(forces.potential, q)[1]
    if forces.applied is not None:
        F += np.asarray(forces.applied(q, qdot, t), dtype=float)
    if forces.cartesian is not None:
        _, J, _ = chart_jet(model, q)
        F += J.T @ np.asarray(forces.cartesian(q, qdot, t), dtype=float)
    return F


def kinetic_energy_jet(model: SystemModel, q, qdot_duals) -> ad.Dual2:
    """Kinetic energy as a ``Dual2`` over ``z = (q, w)``.

    ``qdot_duals`` holds the ``n`` generalized velocities as ``Dual2`` numbers
    over the seed vector ``z`` whose first ``n`` entries are the coordinates
    ``q``.  The chart Jacobian entries enter as duals carrying their exact
    gradient in ``q``; their second ``q``-derivatives would need third chart
    derivatives, which are never formed, so the coordinate-coordinate block
    of the returned Hessian is filled with ``nan``.  Gradient, velocity-velocity
    and velocity-coordinate blocks are exact.
    """
    q = np.asarray(q, dtype=float)
    n = q.size
    D = qdot_duals[0].grad.size
    _, J, H = chart_jet(model, q)
    unknown = np.zeros((D, D))
    unknown[:n, :n] = np.nan
    masses = model.particle_masses
    T = 0.0
    for c in range(J.shape[0]):
        vel = 0.0
        for a in range(n):
            if J[c, a] == 0.0 and not np.any(H[c, a]):
                continue
            grad = np.zeros(D)
            grad[:n] = H[c, a]
            vel = vel + ad.Dual2(J[c, a], grad, unknown) * qdot_duals[a]
        if isinstance(vel, ad.Dual2):
            T = T + 0.5 * masses[c] * (vel * vel)
    if not isinstance(T, ad.Dual2):
        return ad.Dual2(0.0, np.zeros(D), np.zeros((D, D)))
    return T
