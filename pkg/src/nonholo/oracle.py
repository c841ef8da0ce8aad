"""Lagrange-multiplier ground truth in all ``n`` coordinates.

Unknowns are the full accelerations ``qddot`` and one multiplier per
constraint.  The reaction is ``R = sum_s lambda_s w_s`` with
``w_s = (dalpha_s/du_1, ..., dalpha_s/du_m, 0, ..., -1, ..., 0)``, which makes
it orthogonal to every admissible test vector by construction.  The
augmented system is solved in one dense block::

    [ g   -W^T ] [qddot ]   [ F - h ]
    [ W    0   ] [lambda] = [  -c   ]

with ``h_c = sum_ab xi[a, b, c] qdot_a qdot_b`` and ``c`` the part of the
dependent accelerations that does not involve ``uddot``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConstraintError, NonFiniteSystemError
from .geometry import generalized_force, mass_metric, xi_tensor
from .model import GeneralizedState, SystemModel, full_velocity
from .voronec import CONDITION_LIMIT, alpha_jet, condition_estimate


@dataclass(frozen=True)
class MultiplierSolution:
    qddot: np.ndarray
    multipliers: np.ndarray
    reaction: np.ndarray


def reaction_directions(model: SystemModel, state: GeneralizedState) -> np.ndarray:
    """Rows ``w_s`` (k, n)."""
    jet = alpha_jet(model, state, order=1)
    return np.hstack([jet.d_u, -np.eye(model.k)])


def solve_with_multipliers(model: SystemModel, state: GeneralizedState, t: float = 0.0) -> MultiplierSolution:
    n, k = model.n, model.k
    jet = alpha_jet(model, state, order=1)
    v = np.concatenate([state.u, jet.value])
    g = mass_metric(model, state.q)
    h = np.einsum("abc,a,b->c", xi_tensor(model, state.q), v, v)
    F = generalized_force(model, state.q, v, t)
    W = np.hstack([jet.d_u, -np.eye(k)])
    c = jet.d_q @ v

    K = np.zeros((n + k, n + k))
    K[:n, :n] = g
    K[:n, n:] = -W.T
    K[n:, :n] = W
    b = np.concatenate([F - h, -c])
    if not np.all(np.isfinite(b)):
        raise NonFiniteSystemError("non-finite multiplier system")
    cond = condition_estimate(K)
    if not cond <= CONDITION_LIMIT:
        raise DegenerateConstraintError("augmented multiplier system is singular", cond)
    x = np.linalg.solve(K, b)
    residual = np.linalg.norm(K @ x - b)
    if residual >= 1e-10 * (1.0 + np.linalg.norm(b)):
        raise DegenerateConstraintError(f"augmented solve residual {residual:.3e}", cond)
    qddot, lam = x[:n], x[n:]
    return MultiplierSolution(qddot=qddot, multipliers=lam, reaction=W.T @ lam)


def ideality_check(model: SystemModel, state: GeneralizedState, reaction) -> float:
    """Largest component of ``R_i + sum_j dalpha_j/du_i R_{m+j}`` over ``i <= m``."""
    m = model.m
    J = alpha_jet(model, state, order=1).d_u
    reaction = np.asarray(reaction, dtype=float)
    violation = reaction[:m] + J.T @ reaction[m:]
    return float(np.max(np.abs(violation)))


def power_of_reactions(model: SystemModel, state: GeneralizedState, reaction) -> float:
    return float(np.asarray(reaction, dtype=float) @ full_velocity(model, state))
