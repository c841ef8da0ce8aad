"""Equations of motion in Voronec form.

Four assemblies produce a ``ReducedSystem`` ``mass_red @ uddot = rhs`` in the
independent accelerations:

* ``assemble_voronec``: reduced kinetic energy ``T*`` plus the ``B``
  correction terms (nonlinear constraints; covers the linear case).
* ``assemble_voronec_direct``: the unreduced form, full ``T`` partials
  projected on the admissible test vectors before substitution.
* ``assemble_caplygin``: the simplified equations valid when nothing
  depends on the dependent coordinates (linear constraints only).
* ``assemble_appell`` lives in :mod:`nonholo.appell`.

The acceleration terms hidden inside ``d/dt dT*/du`` and inside ``B`` are
linear in ``uddot`` and are collected into ``mass_red`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import NonFiniteSystemError, NotCaplyginError, SingularReductionError, UnsupportedFormulationError
from .geometry import chart_jet, generalized_force, kinetic_energy_jet, mass_metric, metric_derivative
from .model import GeneralizedState, SystemModel, full_velocity

FORMULATIONS = ("voronec-linear", "voronec-nonlinear", "voronec-direct", "caplygin", "appell", "oracle")

CAPLYGIN_TOL = 1e-10
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ReducedSystem:
    mass_red: np.ndarray
    rhs: np.ndarray
    formulation: str


@dataclass(frozen=True)
class BSplit:
    """``B[i, nu] = B0[i, nu] + sum_r B1[i, r, nu] * uddot[r]``."""

    B0: np.ndarray
    B1: np.ndarray


@dataclass(frozen=True)
class AlphaJet:
    """Constraint functions and their derivatives over ``z = (q, u)``."""

    value: np.ndarray  # (k,)
    d_q: np.ndarray  # (k, n)
    d_u: np.ndarray  # (k, m)
    d_uq: np.ndarray | None = None  # (k, m, n)
    d_uu: np.ndarray | None = None  # (k, m, m)


def _seed_state(state: GeneralizedState, order: int) -> tuple[np.ndarray, np.ndarray]:
    z = np.concatenate([state.q, state.u])
    zs = ad.seed2(z) if order == 2 else ad.seed1(z)
    return zs[: state.q.size], zs[state.q.size :]


def alpha_jet(model: SystemModel, state: GeneralizedState, order: int = 2) -> AlphaJet:
    state.check(model)
    n, m = model.n, model.m
    qs, us = _seed_state(state, order)
    D = n + m
    vals, grads, hesses = [], [], []
    for a in model.alpha(qs, us):
        if isinstance(a, ad.Dual2):
            vals.append(a.val), grads.append(a.grad), hesses.append(a.hess)
        elif isinstance(a, ad.Dual1):
            vals.append(a.val), grads.append(a.grad)
        else:
            vals.append(float(a)), grads.append(np.zeros(D)), hesses.append(np.zeros((D, D)))
    grad = np.array(grads).reshape(model.k, D)
    if order == 1:
        return AlphaJet(np.array(vals), grad[:, :n], grad[:, n:])
    hess = np.array(hesses).reshape(model.k, D, D)
    return AlphaJet(np.array(vals), grad[:, :n], grad[:, n:], hess[:, n:, :n], hess[:, n:, n:])


def alpha_velocity_jacobian(model: SystemModel, state: GeneralizedState) -> np.ndarray:
    """``J[nu, i] = d alpha_nu / d u_i``; equals the coefficient matrix for linear constraints."""
    state.check(model)
    return ad.jacobian(lambda us: model.alpha(state.q, us), state.u)


def _coefficient_jet(model: SystemModel, q) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient matrix ``A`` (k, m) and its derivatives ``dA[nu, i, j] = dA[nu, i]/dq_j``."""
    constraints = model.constraints
    if not constraints.linear:
        raise UnsupportedFormulationError("beta coefficients require linear constraints")
    q = np.asarray(q, dtype=float)
    A = constraints.matrix(ad.seed1(q))
    k, m, n = model.k, model.m, model.n
    vals = np.zeros((k, m))
    dA = np.zeros((k, m, n))
    for nu in range(k):
        for i in range(m):
            entry = A[nu, i]
            if isinstance(entry, ad.Dual1):
                vals[nu, i], dA[nu, i] = entry.val, entry.grad
            else:
                vals[nu, i] = float(entry)
    return vals, dA


def beta_coefficients(model: SystemModel, q) -> np.ndarray:
    """``beta[i, j, nu]`` for linear constraints, antisymmetric in ``(i, j)``."""
    A, dA = _coefficient_jet(model, q)
    m = model.m
    curl = dA[:, :, :m] - np.swapaxes(dA[:, :, :m], 1, 2)  # (nu, i, j)
    # sum_mu dA[nu, i, m+mu] A[mu, j]
    cross = np.einsum("nim,mj->nij", dA[:, :, m:], A)
    beta = curl + cross - np.swapaxes(cross, 1, 2)
    return np.transpose(beta, (1, 2, 0))


def b_coefficients(model: SystemModel, state: GeneralizedState) -> BSplit:
    """Split of the nonlinear correction coefficients ``B[i, nu]``."""
    jet = alpha_jet(model, state, order=2)
    return _b_split(model, state, jet)


def _b_split(model: SystemModel, state: GeneralizedState, jet: AlphaJet) -> BSplit:
    m = model.m
    u = state.u
    # d2alpha_nu / du_i dq_r * u_r over independent r
    term_q = np.einsum("nir,r->in", jet.d_uq[:, :, :m], u)
    term_grad = -jet.d_q[:, :m].T
    term_dep = np.einsum("nis,s->in", jet.d_uq[:, :, m:], jet.value)
    term_cross = -np.einsum("si,ns->in", jet.d_u, jet.d_q[:, m:])
    B0 = term_q + term_grad + term_dep + term_cross
    B1 = np.transpose(jet.d_uu, (1, 2, 0))
    return BSplit(B0=B0, B1=B1)


def _projected_force(model: SystemModel, state: GeneralizedState, v: np.ndarray, J: np.ndarray, t: float):
    F = generalized_force(model, state.q, v, t)
    m = model.m
    return F[:m] + J.T @ F[m:]


def _reduced_energy_jet(model: SystemModel, state: GeneralizedState) -> ad.Dual2:
    qs, us = _seed_state(state, 2)
    qdot = np.concatenate([us, model.alpha(qs, us)])
    return kinetic_energy_jet(model, state.q, qdot)


def _momenta_dependent(model: SystemModel, state: GeneralizedState, v: np.ndarray) -> np.ndarray:
    """``dT/dqdot_{m+nu}`` of the full kinetic energy, then ``qdot = v`` substituted."""
    return (mass_metric(model, state.q) @ v)[model.m :]


def assemble_voronec(model: SystemModel, state: GeneralizedState, t: float = 0.0) -> ReducedSystem:
    """Reduced equations ``d/dt dT*/du_i - dT*/dq_i - ... - sum_nu p_nu B_i^nu = F_i``."""
    n, m = model.n, model.m
    jet = alpha_jet(model, state, order=2)
    v = np.concatenate([state.u, jet.value])
    Tstar = _reduced_energy_jet(model, state)
    H_uu = Tstar.hess[n:, n:]
    H_uq = Tstar.hess[n:, :n]
    dT_dq = Tstar.grad[:n]
    p = _momenta_dependent(model, state, v)
    split = _b_split(model, state, jet)
    J = jet.d_u

    mass_red = H_uu - np.einsum("irn,n->ir", split.B1, p)
    rhs = (
        _projected_force(model, state, v, J, t)
        - H_uq @ v
        + dT_dq[:m]
        + J.T @ dT_dq[m:]
        + split.B0 @ p
    )
    tag = "voronec-linear" if model.constraints.linear else "voronec-nonlinear"
    return ReducedSystem(mass_red, rhs, tag)


def assemble_voronec_beta(model: SystemModel, state: GeneralizedState, t: float = 0.0) -> ReducedSystem:
    """Linear-constraint equations with the ``beta`` coefficients.

    ``d/dt dT*/du_i - dT*/dq_i - sum_nu A[nu, i] dT*/dq_{m+nu}
    - sum_{j, nu} beta[i, j, nu] u_j p_nu = F_i``; no acceleration enters the
    correction, so the mass matrix is the Hessian of ``T*`` in ``u``.
    """
    n, m = model.n, model.m
    A, _ = _coefficient_jet(model, state.q)
    v = np.concatenate([state.u, A @ state.u])
    Tstar = _reduced_energy_jet(model, state)
    dT_dq = Tstar.grad[:n]
    p = _momenta_dependent(model, state, v)
    beta = beta_coefficients(model, state.q)
    rhs = (
        _projected_force(model, state, v, A, t)
        - Tstar.hess[n:, :n] @ v
        + dT_dq[:m]
        + A.T @ dT_dq[m:]
        + np.einsum("ijn,j,n->i", beta, state.u, p)
    )
    return ReducedSystem(Tstar.hess[n:, n:], rhs, "voronec-linear")


def assemble_voronec_direct(model: SystemModel, state: GeneralizedState, t: float = 0.0) -> ReducedSystem:
    """Unreduced form: full-``T`` Lagrange terms projected on ``(I | J^T)``."""
    n, m = model.n, model.m
    jet = alpha_jet(model, state, order=1)
    v = np.concatenate([state.u, jet.value])
    z = ad.seed2(np.concatenate([state.q, v]))
    T = kinetic_energy_jet(model, state.q, z[n:])
    H_vv = T.hess[n:, n:]
    H_vq = T.hess[n:, :n]
    dT_dq = T.grad[:n]
    J = jet.d_u
    Gamma = np.vstack([np.eye(m), J])
    offset = jet.d_q @ v  # dependent accelerations at uddot = 0
    F = generalized_force(model, state.q, v, t)
    mass_red = Gamma.T @ H_vv @ Gamma
    rhs = Gamma.T @ (F - H_vv[:, m:] @ offset - H_vq @ v + dT_dq)
    return ReducedSystem(mass_red, rhs, "voronec-direct")


def check_caplygin(model: SystemModel, state: GeneralizedState, tol: float = CAPLYGIN_TOL) -> None:
    """Raise ``NotCaplyginError`` unless nothing depends on the dependent coordinates.

    Sampled at the query state: metric derivatives, coefficient derivatives
    and force derivatives with respect to ``q[m:]`` must all vanish.
    """
    if not model.constraints.linear:
        raise NotCaplyginError("constraints are nonlinear", float("inf"))
    m = model.m
    q = state.q
    dg = metric_derivative(model, q)[:, :, m:]
    if np.max(np.abs(dg), initial=0.0) > tol:
        raise NotCaplyginError("kinetic energy depends on a dependent coordinate", float(np.max(np.abs(dg))))
    _, dA = _coefficient_jet(model, q)
    dep = np.abs(dA[:, :, m:])
    if np.max(dep, initial=0.0) > tol:
        raise NotCaplyginError("constraint coefficients depend on a dependent coordinate", float(dep.max()))
    forces = model.forces
    v = full_velocity(model, state)
    worst = 0.0
    if forces.potential is not None:
        _, _, hU = ad.hessian(forces.potential, q)
        worst = max(worst, float(np.max(np.abs(hU[:, m:]))))
    if forces.applied is not None:
        dF = ad.jacobian(lambda qs: forces.applied(qs, v, 0.0), q)
        worst = max(worst, float(np.max(np.abs(dF[:, m:]))))
    if forces.cartesian is not None:
        _, Jc, Hc = chart_jet(model, q)
        Fc = np.asarray(forces.cartesian(q, v, 0.0), dtype=float)
        dFc = ad.jacobian(lambda qs: forces.cartesian(qs, v, 0.0), q)
        # d/dq_c of J^T F
        dF = np.einsum("aic,a->ic", Hc, Fc) + Jc.T @ dFc
        worst = max(worst, float(np.max(np.abs(dF[:, m:]))))
    if worst > tol:
        raise NotCaplyginError("forces depend on a dependent coordinate", worst)


def assemble_caplygin(model: SystemModel, state: GeneralizedState, t: float = 0.0) -> ReducedSystem:
    """Caplygin equations: reduced ``T*`` and only the curl part of ``beta``."""
    check_caplygin(model, state)
    n, m = model.n, model.m
    A, dA = _coefficient_jet(model, state.q)
    v = np.concatenate([state.u, A @ state.u])
    Tstar = _reduced_energy_jet(model, state)
    H_uu = Tstar.hess[n:, n:]
    H_uq = Tstar.hess[n:, :n]
    dT_dq = Tstar.grad[:n]
    p = _momenta_dependent(model, state, v)
    curl = dA[:, :, :m] - np.swapaxes(dA[:, :, :m], 1, 2)  # (nu, i, j)
    correction = np.einsum("nij,j,n->i", curl, state.u, p)
    rhs = _projected_force(model, state, v, A, t) - H_uq @ v + dT_dq[:m] + correction
    return ReducedSystem(H_uu, rhs, "caplygin")


def condition_estimate(M: np.ndarray) -> float:
    with np.errstate(all="ignore"):
        return float(np.linalg.cond(M))


def solve_accelerations(system: ReducedSystem) -> np.ndarray:
    """Solve ``mass_red @ uddot = rhs`` by LU with partial pivoting."""
    M, b = system.mass_red, system.rhs
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
        raise NonFiniteSystemError("non-finite reduced system", float("inf"))
    cond = condition_estimate(M)
    if not cond <= CONDITION_LIMIT:
        raise SingularReductionError(f"reduced mass matrix is singular ({system.formulation})", cond)
    x = np.linalg.solve(M, b)
    residual = np.linalg.norm(M @ x - b)
    if residual >= 1e-10 * (1.0 + np.linalg.norm(b)):
        raise SingularReductionError(f"solve residual {residual:.3e} too large", cond)
    return x


def dependent_accelerations(model: SystemModel, state: GeneralizedState, uddot) -> np.ndarray:
    """Total time derivative of the constraint functions along the motion."""
    jet = alpha_jet(model, state, order=1)
    v = np.concatenate([state.u, jet.value])
    return jet.d_q @ v + jet.d_u @ np.asarray(uddot, dtype=float)
