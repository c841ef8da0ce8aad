"""Forward-mode automatic differentiation with first- and second-order duals.

Every derivative used by the engine (chart Jacobians and second derivatives,
partials of the constraint functions, derivatives of the kinetic energy) is
produced here.  Two number types are provided:

``Dual1``
    value plus a gradient vector of fixed length ``d``.
``Dual2``
    value, gradient and Hessian.  The Hessian update rules only ever add
    ``outer(a, b) + outer(b, a)`` or ``outer(a, a)`` terms to symmetric
    matrices, so the result is bitwise symmetric without post-hoc
    symmetrization.

User functions receive a numpy object array of duals and may use the
arithmetic operators, ``**`` and the primitives exported below (``sin``,
``cos``, ``tan``, ``exp``, ``log``, ``sqrt``, ``arctan``).  ``np.sin`` and
friends also work on object arrays since they dispatch to the methods of the
same name.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "Dual1",
    "Dual2",
    "DomainError",
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "sqrt",
    "arctan",
    "value_of",
    "seed1",
    "seed2",
    "gradient",
    "hessian",
    "jacobian",
    "vector_jet",
]


# (f, f', f'') evaluated at a float; each raises DomainError outside the domain.


def _sin(x):
    s, c = math.sin(x), math.cos(x)
    return s, c, -s


def _cos(x):
    s, c = math.sin(x), math.cos(x)
    return c, -s, -c


def _tan(x):
    c = math.cos(x)
    if c == 0.0:
        raise DomainError("tan", x)
    t = math.tan(x)
    sec2 = 1.0 + t * t
    return t, sec2, 2.0 * t * sec2


def _exp(x):
    try:
        e = math.exp(x)
    except OverflowError:
        raise DomainError("exp", x) from None
    return e, e, e


def _log(x):
    if not x > 0.0:
        raise DomainError("log", x)
    return math.log(x), 1.0 / x, -1.0 / (x * x)


def _sqrt(x):
    if not x > 0.0:
        # the derivative is unbounded at 0
        raise DomainError("sqrt", x)
    r = math.sqrt(x)
    return r, 0.5 / r, -0.25 / (r * x)


def _arctan(x):
    d = 1.0 / (1.0 + x * x)
    return math.atan(x), d, -2.0 * x * d * d


def _reciprocal(x):
    if x == 0.0:
        raise DomainError("reciprocal", x)
    r = 1.0 / x
    return r, -r * r, 2.0 * r * r * r


def _power_rule(c: float):
    def rule(x):
        if x == 0.0 and c < 2.0 and c not in (0.0, 1.0):
            raise DomainError("pow", x)
        if x < 0.0 and not float(c).is_integer():
            raise DomainError("pow", x)
        if c == 0.0:
            return 1.0, 0.0, 0.0
        if c == 1.0:
            return x, 1.0, 0.0
        return x**c, c * x ** (c - 1.0), c * (c - 1.0) * x ** (c - 2.0)

    return rule


_RULES = {
    "sin": _sin,
    "cos": _cos,
    "tan": _tan,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "arctan": _arctan,
}


class _DualBase:
    __slots__ = ()

    def _lift(self, other):
        raise NotImplementedError

    # Comparisons look at the value only; they let user code branch.
    def __lt__(self, other):
        return self.val < value_of(other)

    def __le__(self, other):
        return self.val <= value_of(other)

    def __gt__(self, other):
        return self.val > value_of(other)

    def __ge__(self, other):
        return self.val >= value_of(other)

    def __radd__(self, other):
        return self.__add__(other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, _DualBase):
            return self * other._unary(_reciprocal)
        if other == 0:
            raise DomainError("reciprocal", 0.0)
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self._unary(_reciprocal) * other

    def __pow__(self, other):
        if isinstance(other, _DualBase):
            return (other * self.log()).exp()
        return self._unary(_power_rule(float(other)))

    def __rpow__(self, other):
        return (self * math.log(other)).exp() if other > 0 else _raise("pow", other)

    def __pos__(self):
        return self

    def sin(self):
        return self._unary(_sin)

    def cos(self):
        return self._unary(_cos)

    def tan(self):
        return self._unary(_tan)

    def exp(self):
        return self._unary(_exp)

    def log(self):
        return self._unary(_log)

    def sqrt(self):
        return self._unary(_sqrt)

    def arctan(self):
        return self._unary(_arctan)

    def __float__(self):
        raise TypeError("refusing to drop derivative information; use value_of()")


def _raise(name, x):
    raise DomainError(name, x)


class Dual1(_DualBase):
    """Value with a gradient of fixed length."""

    __slots__ = ("val", "grad")

    def __init__(self, val: float, grad: np.ndarray):
        self.val = float(val)
        self.grad = grad

    def __repr__(self):
        return f"Dual1({self.val!r}, {self.grad!r})"

    def _check(self, other: "Dual1"):
        if not isinstance(other, Dual1) or other.grad.shape != self.grad.shape:
            raise TypeError("cannot mix duals of different order or seed dimension")

    def __neg__(self):
        return Dual1(-self.val, -self.grad)

    def __add__(self, other):
        if isinstance(other, _DualBase):
            self._check(other)
            return Dual1(self.val + other.val, self.grad + other.grad)
        return Dual1(self.val + other, self.grad)

    def __sub__(self, other):
        if isinstance(other, _DualBase):
            self._check(other)
            return Dual1(self.val - other.val, self.grad - other.grad)
        return Dual1(self.val - other, self.grad)

    def __mul__(self, other):
        if isinstance(other, _DualBase):
            self._check(other)
            return Dual1(self.val * other.val, self.grad * other.val + other.grad * self.val)
        return Dual1(self.val * other, self.grad * other)

    def _unary(self, rule):
        f, df, _ = rule(self.val)
        return Dual1(f, df * self.grad)


class Dual2(_DualBase):
    """Value with gradient and Hessian of fixed seed dimension."""

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val: float, grad: np.ndarray, hess: np.ndarray):
        self.val = float(val)
        self.grad = grad
        self.hess = hess

    def __repr__(self):
        return f"Dual2({self.val!r}, {self.grad!r}, {self.hess!r})"

    def _check(self, other: "Dual2"):
        if not isinstance(other, Dual2) or other.grad.shape != self.grad.shape:
            raise TypeError("cannot mix duals of different order or seed dimension")

    def __neg__(self):
        return Dual2(-self.val, -self.grad, -self.hess)

    def __add__(self, other):
        if isinstance(other, _DualBase):
            self._check(other)
            return Dual2(self.val + other.val, self.grad + other.grad, self.hess + other.hess)
        return Dual2(self.val + other, self.grad, self.hess)

    def __sub__(self, other):
        if isinstance(other, _DualBase):
            self._check(other)
            return Dual2(self.val - other.val, self.grad - other.grad, self.hess - other.hess)
        return Dual2(self.val - other, self.grad, self.hess)

    def __mul__(self, other):
        if isinstance(other, _DualBase):
            self._check(other)
            a, b = self, other
            cross = np.outer(a.grad, b.grad)
            return Dual2(
                a.val * b.val,
                a.grad * b.val + b.grad * a.val,
                a.hess * b.val + b.hess * a.val + (cross + cross.T),
            )
        return Dual2(self.val * other, self.grad * other, self.hess * other)

    def _unary(self, rule):
        f, df, d2f = rule(self.val)
        return Dual2(f, df * self.grad, df * self.hess + d2f * np.outer(self.grad, self.grad))


def value_of(x) -> float:
    """Plain float value of a dual or a number."""
    return x.val if isinstance(x, _DualBase) else float(x)


def _dispatch(name: str) -> Callable:
    rule = _RULES[name]

    def fn(x):
        if isinstance(x, _DualBase):
            return x._unary(rule)
        if isinstance(x, np.ndarray):
            return np.array([fn(xi) for xi in x.ravel()], dtype=object).reshape(x.shape)
        return rule(float(x))[0]

    fn.__name__ = name
    fn.__doc__ = f"Elementwise {name} for floats, duals and object arrays."
    return fn


sin = _dispatch("sin")
cos = _dispatch("cos")
tan = _dispatch("tan")
exp = _dispatch("exp")
log = _dispatch("log")
sqrt = _dispatch("sqrt")
arctan = _dispatch("arctan")


def seed1(x: Sequence[float]) -> np.ndarray:
    """Independent ``Dual1`` variables at ``x`` as an object array."""
    x = np.asarray(x, dtype=float)
    eye = np.eye(x.size)
    return np.array([Dual1(x[i], eye[i]) for i in range(x.size)], dtype=object)


def seed2(x: Sequence[float]) -> np.ndarray:
    """Independent ``Dual2`` variables at ``x`` as an object array."""
    x = np.asarray(x, dtype=float)
    d = x.size
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.array([Dual2(x[i], eye[i], zero) for i in range(d)], dtype=object)


def _unpack1(y, d: int) -> tuple[float, np.ndarray]:
    if isinstance(y, Dual1):
        return y.val, y.grad
    if isinstance(y, _DualBase):
        raise TypeError("function returned a dual of the wrong order")
    return float(y), np.zeros(d)


def _unpack2(y, d: int) -> tuple[float, np.ndarray, np.ndarray]:
    if isinstance(y, Dual2):
        return y.val, y.grad, y.hess
    if isinstance(y, _DualBase):
        raise TypeError("function returned a dual of the wrong order")
    return float(y), np.zeros(d), np.zeros((d, d))


def gradient(f: Callable, x: Sequence[float]) -> tuple[float, np.ndarray]:
    """Value and gradient of a scalar function ``f(x)`` of a vector argument."""
    xs = seed1(x)
    val, grad = _unpack1(f(xs), xs.size)
    return val, np.array(grad, dtype=float)


def hessian(f: Callable, x: Sequence[float]) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and (exactly symmetric) Hessian of a scalar ``f(x)``."""
    xs = seed2(x)
    val, grad, hess = _unpack2(f(xs), xs.size)
    return val, np.array(grad, dtype=float), np.array(hess, dtype=float)


def jacobian(F: Callable, x: Sequence[float]) -> np.ndarray:
    """Jacobian ``J[i, j] = dF_i/dx_j`` of a vector function."""
    xs = seed1(x)
    out = [_unpack1(y, xs.size)[1] for y in F(xs)]
    return np.array(out, dtype=float).reshape(len(out), xs.size)


def vector_jet(F: Callable, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values ``(c,)``, Jacobian ``(c, d)`` and second derivatives ``(c, d, d)``."""
    xs = seed2(x)
    d = xs.size
    parts = [_unpack2(y, d) for y in F(xs)]
    vals = np.array([p[0] for p in parts], dtype=float)
    jac = np.array([p[1] for p in parts], dtype=float).reshape(len(parts), d)
    hess = np.array([p[2] for p in parts], dtype=float).reshape(len(parts), d, d)
    return vals, jac, hess
