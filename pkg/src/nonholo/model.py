"""Problem definition: point masses, chart, kinematical constraints and forces.

Coordinates follow a fixed convention: of the ``n`` generalized coordinates
the last ``k`` are dependent, and their velocities are given by the explicit
constraint functions ``qdot[m + nu] = alpha_nu(q, u)`` of the ``m = n - k``
independent velocities ``u``.  Constraint and chart callables receive numpy
object arrays (possibly of duals) and must be written with the arithmetic
operators and the primitives of :mod:`nonholo.autodiff`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from . import autodiff as ad
from .errors import DimensionError, ModelError, SingularConstraintsError

Array = np.ndarray


@dataclass(frozen=True)
class LinearConstraints:
    """``qdot[m + nu] = sum_i A[nu, i](q) * u_i``.

    ``coeffs(q)`` returns a ``k x m`` nested sequence (or array) of entries.
    """

    coeffs: Callable[[Array], Sequence]
    k: int
    m: int

    linear = True

    def matrix(self, q) -> Array:
        A = np.asarray(self.coeffs(q), dtype=object)
        if A.shape != (self.k, self.m):
            raise DimensionError(f"coefficient matrix has shape {A.shape}, expected {(self.k, self.m)}")
        return A

    def alpha(self, q, u) -> Array:
        A = self.matrix(q)
        out = np.empty(self.k, dtype=object)
        for nu in range(self.k):
            acc = 0.0
            for i in range(self.m):
                acc = acc + A[nu, i] * u[i]
            out[nu] = acc
        return out

    def as_nonlinear(self) -> "NonlinearConstraints":
        return NonlinearConstraints(alphas=self.alpha, k=self.k, m=self.m)


@dataclass(frozen=True)
class NonlinearConstraints:
    """``qdot[m + nu] = alphas(q, u)[nu]`` for arbitrary smooth functions."""

    alphas: Callable[[Array, Array], Sequence]
    k: int
    m: int

    linear = False

    def alpha(self, q, u) -> Array:
        out = np.asarray(self.alphas(q, u), dtype=object).reshape(-1)
        if out.size != self.k:
            raise DimensionError(f"constraint function returned {out.size} values, expected {self.k}")
        return out


ConstraintSet = Union[LinearConstraints, NonlinearConstraints]


@dataclass(frozen=True)
class ForceModel:
    """Generalized forces.

    ``potential(q)`` follows the sign convention ``F = +grad U``.  ``applied``
    returns generalized components directly; ``cartesian`` returns ``3N``
    per-particle components that get projected through the chart.  When
    ``time_dependent`` is set, energy diagnostics are reported unavailable.
    """

    potential: Optional[Callable[[Array], object]] = None
    applied: Optional[Callable[[Array, Array, float], Sequence[float]]] = None
    cartesian: Optional[Callable[[Array, Array, float], Sequence[float]]] = None
    time_dependent: bool = False

    @property
    def conservative(self) -> bool:
        return self.applied is None and self.cartesian is None

    @property
    def is_zero(self) -> bool:
        return self.potential is None and self.conservative


@dataclass(frozen=True)
class SystemModel:
    masses: tuple
    chart: Callable[[Array], Sequence]
    constraints: ConstraintSet
    n: int
    forces: ForceModel = field(default_factory=ForceModel)
    name: str = ""

    def __post_init__(self):
        masses = tuple(float(x) for x in self.masses)
        object.__setattr__(self, "masses", masses)
        if len(masses) < 1:
            raise ModelError("at least one point mass is required")
        if any(not mass > 0.0 for mass in masses):
            raise ModelError("all masses must be positive")
        c = self.constraints
        if not 1 <= c.k < self.n:
            raise ModelError(f"need 1 <= k < n, got k={c.k}, n={self.n}")
        if c.m != self.n - c.k:
            raise ModelError(f"constraint set declares m={c.m}, expected {self.n - c.k}")

    @property
    def k(self) -> int:
        return self.constraints.k

    @property
    def m(self) -> int:
        return self.n - self.constraints.k

    @property
    def n_particles(self) -> int:
        return len(self.masses)

    @property
    def particle_masses(self) -> Array:
        """Mass attached to each of the ``3N`` chart components."""
        return np.repeat(np.asarray(self.masses), 3)

    def positions(self, q) -> Array:
        X = np.asarray(self.chart(q), dtype=object).reshape(-1)
        if X.size != 3 * self.n_particles:
            raise DimensionError(f"chart returned {X.size} components, expected {3 * self.n_particles}")
        return X

    def alpha(self, q, u) -> Array:
        return self.constraints.alpha(q, u)


@dataclass(frozen=True)
class GeneralizedState:
    q: Array
    u: Array

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        u = np.array(self.u, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(u))):
            raise ModelError("state entries must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "u", u)

    def check(self, model: SystemModel) -> None:
        if self.q.size != model.n or self.u.size != model.m:
            raise DimensionError(
                f"state has (n, m) = ({self.q.size}, {self.u.size}), model expects ({model.n}, {model.m})"
            )


@dataclass(frozen=True)
class ImplicitLinearConstraints:
    """Constraints written as ``Phi(q) @ qdot = 0`` with ``Phi`` of shape ``k x n``."""

    phi: Callable[[Array], Sequence]


def full_velocity(model: SystemModel, state: GeneralizedState) -> Array:
    """Complete the independent velocities with the dependent ones."""
    state.check(model)
    alpha = model.alpha(state.q, state.u)
    return np.concatenate([state.u, np.array([ad.value_of(a) for a in alpha])])


def constraint_residual(model: SystemModel, q, qdot) -> Array:
    """``qdot[m + nu] - alpha_nu(q, qdot[:m])``; zero iff ``qdot`` is admissible."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    if q.size != model.n or qdot.size != model.n:
        raise DimensionError("q and qdot must both have length n")
    m = model.m
    alpha = model.alpha(q, qdot[:m])
    return qdot[m:] - np.array([ad.value_of(a) for a in alpha])


def implicit_to_explicit(impl: ImplicitLinearConstraints, q, rtol: float = 1e-10) -> tuple[Array, Array]:
    """Solve ``Phi(q) qdot = 0`` for ``k`` dependent velocities.

    Dependent coordinates are chosen by column-pivoted QR of ``Phi`` (largest
    remaining column norm first), which keeps the ``k x k`` block well
    conditioned.  Returns ``(perm, A)`` where ``perm`` lists the original
    coordinate indices with independent ones first and dependent ones last
    (each group in original order), and ``A`` is ``k x m`` with
    ``qdot[perm[m:]] = A @ qdot[perm[:m]]``.
    """
    phi = np.atleast_2d(np.asarray(impl.phi(np.asarray(q, dtype=float)), dtype=float))
    k, n = phi.shape
    if k >= n:
        raise SingularConstraintsError(min(k, n), k)
    _, r, piv = scipy.linalg.qr(phi, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rtol * diag[0])) if diag[0] > 0 else 0
    if rank < k:
        raise SingularConstraintsError(rank, k)
    dependent = sorted(int(j) for j in piv[:k])
    independent = [j for j in range(n) if j not in dependent]
    perm = np.array(independent + dependent)
    A = -np.linalg.solve(phi[:, dependent], phi[:, independent])
    return perm, A


def _solve_small(M: Array, b: Array) -> Array:
    """Gaussian elimination with partial pivoting on object arrays (duals allowed)."""
    M = M.copy()
    b = b.copy()
    size = M.shape[0]
    for col in range(size):
        pivot = max(range(col, size), key=lambda r: abs(ad.value_of(M[r, col])))
        if ad.value_of(M[pivot, col]) == 0.0:
            raise SingularConstraintsError(col, size)
        if pivot != col:
            M[[col, pivot]] = M[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        for r in range(col + 1, size):
            factor = M[r, col] / M[col, col]
            M[r, col:] = M[r, col:] - factor * M[col, col:]
            b[r] = b[r] - factor * b[col]
    x = np.empty(size, dtype=object)
    for r in range(size - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, size):
            acc = acc - M[r, c] * x[c]
        x[r] = acc / M[r, r]
    return x


def linear_constraints_from_implicit(
    impl: ImplicitLinearConstraints, perm: Sequence[int], k: int
) -> LinearConstraints:
    """Explicit coefficients for implicit constraints in permuted coordinates.

    The returned coefficient function takes ``q`` already in permuted order and
    stays differentiable (the ``k x k`` solve runs on duals).
    """
    perm = np.asarray(perm, dtype=int)
    n = perm.size
    inverse = np.argsort(perm)
    m = n - k

    def coeffs(qp):
        q = np.asarray(qp, dtype=object)[inverse]
        phi = np.atleast_2d(np.asarray(impl.phi(q), dtype=object))[:, perm]
        dep, ind = phi[:, m:], phi[:, :m]
        A = np.empty((k, m), dtype=object)
        for i in range(m):
            A[:, i] = -_solve_small(dep, ind[:, i])
        return A

    return LinearConstraints(coeffs=coeffs, k=k, m=m)
