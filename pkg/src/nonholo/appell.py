"""Projected Newton form for fixed charts and the acceleration energy.

The coefficients come from contracting the metric ``g`` and the tensor
``xi`` with the admissible test vectors ``Gamma = (I_m ; dalpha/du)``::

    sum_nu C[i,nu] uddot_nu + sum_{nu,mu} D[i,nu,mu] u_nu u_mu
        + sum_nu E[i,nu] u_nu + G[i] = F_i + sum_j dalpha_j/du_i F_{m+j}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .geometry import chart_jet, generalized_force, mass_metric, xi_tensor
from .model import GeneralizedState, SystemModel
from .voronec import ReducedSystem, alpha_jet, dependent_accelerations


@dataclass(frozen=True)
class ProjectedCoefficients:
    C: np.ndarray  # (m, m)
    D: np.ndarray  # (m, m, m), D[i, nu, mu]
    E: np.ndarray  # (m, m), E[i, nu]
    G: np.ndarray  # (m,)

    def left_side(self, u, uddot) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self.C @ uddot + np.einsum("ivm,v,m->i", self.D, u, u) + self.E @ u + self.G


def projected_coefficients(model: SystemModel, state: GeneralizedState) -> ProjectedCoefficients:
    m = model.m
    g = mass_metric(model, state.q)
    xi = xi_tensor(model, state.q)
    jet = alpha_jet(model, state, order=1)
    alpha, J, dq = jet.value, jet.d_u, jet.d_q
    Gamma = np.vstack([np.eye(m), J])  # (n, m); column i is the i-th test vector

    g_dep = g[m:, :] @ Gamma  # g_{m+r, i} + sum_s g_{m+r, m+s} J[s, i]   -> (k, m)
    C = Gamma.T @ g @ Gamma
    D = np.einsum("vwc,ci->ivw", xi[:m, :m, :], Gamma)
    xi_mixed = np.einsum("vrc,ci->ivr", xi[:m, m:, :], Gamma)  # (m, m, k)
    E = 2.0 * xi_mixed @ alpha + np.einsum("ri,rv->iv", g_dep, dq[:, :m])
    xi_dep = np.einsum("rsc,ci->irs", xi[m:, m:, :], Gamma)  # (m, k, k)
    G = np.einsum("irs,r,s->i", xi_dep, alpha, alpha) + np.einsum("ri,rs,s->i", g_dep, dq[:, m:], alpha)
    return ProjectedCoefficients(C=C, D=D, E=E, G=G)


def assemble_appell(model: SystemModel, state: GeneralizedState, t: float = 0.0) -> ReducedSystem:
    coeffs = projected_coefficients(model, state)
    jet = alpha_jet(model, state, order=1)
    m = model.m
    v = np.concatenate([state.u, jet.value])
    F = generalized_force(model, state.q, v, t)
    forcing = F[:m] + jet.d_u.T @ F[m:]
    u = state.u
    rhs = forcing - np.einsum("ivm,v,m->i", coeffs.D, u, u) - coeffs.E @ u - coeffs.G
    return ReducedSystem(coeffs.C, rhs, "appell")


def acceleration_energy(model: SystemModel, q, qdot, qddot) -> float:
    """``S = 1/2 sum_p m_p |d2P_p/dt2|^2`` through the chart's first and second derivatives."""
    _, J, H = chart_jet(model, q)
    qdot = np.asarray(qdot, dtype=float)
    Pddot = J @ np.asarray(qddot, dtype=float) + np.einsum("cab,a,b->c", H, qdot, qdot)
    return 0.5 * float(np.sum(model.particle_masses * Pddot**2))


def acceleration_energy_gradient(model: SystemModel, state: GeneralizedState, uddot) -> np.ndarray:
    """``dS/duddot_i`` with the dependent accelerations expanded first.

    The dependent block of ``qddot`` is affine in ``uddot``; ``S`` is pushed
    through the chart with ``Dual1`` numbers seeded on ``uddot``.
    """
    m = model.m
    jet = alpha_jet(model, state, order=1)
    v = np.concatenate([state.u, jet.value])
    _, J, H = chart_jet(model, state.q)
    quadratic = np.einsum("cab,a,b->c", H, v, v)
    offset = dependent_accelerations(model, state, np.zeros(m))

    def S(us):
        qdd = np.concatenate([us, offset + jet.d_u @ us])
        total = 0.0
        for c in range(J.shape[0]):
            Pdd = quadratic[c]
            for a in range(model.n):
                if J[c, a] != 0.0:
                    Pdd = Pdd + J[c, a] * qdd[a]
            total = total + 0.5 * model.particle_masses[c] * Pdd * Pdd
        return total

    return ad.gradient(S, np.asarray(uddot, dtype=float))[1]
