"""Truncated power series (jets) over complex scalars.

A jet of order ``K`` at ``base_point`` stores the Taylor coefficients
``c[0..K]`` of a germ ``c[0] + c[1] t + ... + c[K] t**K`` where ``t`` is
the local parameter centred at ``base_point``.

The module has two layers. The ``_series_*`` kernels work on plain arrays
whose *first* axis is the coefficient index and whose remaining axes are a
batch (one jet per sample point), which is how curves are expanded on whole
quadrature grids at once. :class:`JetSeries` wraps a single 1-D coefficient
vector and gives it value semantics and operators.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import config
from .errors import DivisionByZeroSeries, MismatchedBasePoint

DEFAULT_TAU_REL = 1e-9


class Saturated(enum.Enum):
    SATURATED = "SATURATED"

    def __repr__(self) -> str:
        return self.value


SATURATED = Saturated.SATURATED


# ---------------------------------------------------------------------------
# batched kernels (axis 0 = coefficient index)
# ---------------------------------------------------------------------------


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    K = min(a.shape[0], b.shape[0]) - 1
    out = np.zeros((K + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]), dtype=np.result_type(a, b))
    for k in range(K + 1):
        acc = out[k]
        for j in range(k + 1):
            acc = acc + a[j] * b[k - j]
        out[k] = acc
    return out


def _series_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a / b`` assuming ``b[0]`` is nonzero everywhere in the batch."""
    K = min(a.shape[0], b.shape[0]) - 1
    shape = (K + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:])
    q = np.zeros(shape, dtype=np.result_type(a, b))
    for k in range(K + 1):
        acc = a[k]
        for j in range(k):
            acc = acc - q[j] * b[k - j]
        q[k] = acc / b[0]
    return q


def _series_exp(a: np.ndarray) -> np.ndarray:
    # e' = a' e  =>  k e_k = sum_{j=1..k} j a_j e_{k-j}
    K = a.shape[0] - 1
    e = np.zeros_like(a)
    e[0] = np.exp(a[0])
    for k in range(1, K + 1):
        acc = np.zeros_like(a[0])
        for j in range(1, k + 1):
            acc = acc + j * a[j] * e[k - j]
        e[k] = acc / k
    return e


def _series_pow(a: np.ndarray, p: int) -> np.ndarray:
    if p < 0:
        raise ValueError("negative exponents are not supported")
    result = np.zeros_like(a)
    result[0] = 1
    base = a
    while p:
        if p & 1:
            result = _series_mul(result, base)
        p >>= 1
        if p:
            base = _series_mul(base, base)
    return result


def _series_compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """``outer(inner)`` where ``inner`` has zero constant term."""
    K = min(outer.shape[0], inner.shape[0]) - 1
    shape = (K + 1,) + np.broadcast_shapes(outer.shape[1:], inner.shape[1:])
    acc = np.zeros(shape, dtype=np.result_type(outer, inner))
    acc[0] = outer[K]
    for j in range(K - 1, -1, -1):
        acc = _series_mul(acc, inner[: K + 1])
        acc[0] = acc[0] + outer[j]
    return acc


def _series_derivative(a: np.ndarray) -> np.ndarray:
    K = a.shape[0] - 1
    if K == 0:
        return np.zeros_like(a[:0])
    k = np.arange(1, K + 1).reshape((K,) + (1,) * (a.ndim - 1))
    return a[1:] * k


def _series_rescale(a: np.ndarray, lam: complex) -> np.ndarray:
    K = a.shape[0] - 1
    powers = np.asarray(lam, dtype=a.dtype) ** np.arange(K + 1)
    return a * powers.reshape((K + 1,) + (1,) * (a.ndim - 1))


def _leading_exact_zeros(c: np.ndarray) -> int:
    nz = np.flatnonzero(c != 0)
    return int(nz[0]) if nz.size else c.shape[0]


# ---------------------------------------------------------------------------
# value type
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JetSeries:
    """A truncated Taylor expansion at ``base_point``."""

    base_point: complex
    coeffs: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.coeffs)
        c = np.array(raw, dtype=np.result_type(raw.dtype, config.complex_dtype()), copy=True)
        if c.ndim != 1 or c.shape[0] == 0:
            raise ValueError("coeffs must be a nonempty 1-D sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "base_point", complex(self.base_point))

    @classmethod
    def constant(cls, value: complex, order: int, base_point: complex = 0j) -> "JetSeries":
        c = np.zeros(order + 1, dtype=config.complex_dtype())
        c[0] = value
        return cls(base_point, c)

    @classmethod
    def variable(cls, order: int, base_point: complex = 0j) -> "JetSeries":
        """The identity germ ``z`` expanded at ``base_point``."""
        c = np.zeros(order + 1, dtype=config.complex_dtype())
        c[0] = base_point
        if order >= 1:
            c[1] = 1
        return cls(base_point, c)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __getitem__(self, k):
        return self.coeffs[k]

    def __repr__(self) -> str:
        return f"JetSeries(base_point={self.base_point!r}, coeffs={self.coeffs.tolist()!r})"

    def _check(self, other: "JetSeries") -> None:
        if other.base_point != self.base_point:
            raise MismatchedBasePoint(f"base points differ: {self.base_point} vs {other.base_point}")

    def _wrap(self, c: np.ndarray) -> "JetSeries":
        return JetSeries(self.base_point, c)

    def _coerce(self, other) -> "JetSeries":
        if isinstance(other, JetSeries):
            self._check(other)
            return other
        return JetSeries.constant(other, self.order, self.base_point)

    def __add__(self, other):
        o = self._coerce(other)
        K = min(self.order, o.order)
        return self._wrap(self.coeffs[: K + 1] + o.coeffs[: K + 1])

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, JetSeries):
            return self._wrap(self.coeffs * other)
        self._check(other)
        return self._wrap(_series_mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        K = min(self.order, o.order)
        a, b = self.coeffs[: K + 1], o.coeffs[: K + 1]
        vb = _leading_exact_zeros(b)
        if vb > K:
            raise DivisionByZeroSeries("divisor vanishes identically to the available order")
        va = _leading_exact_zeros(a)
        if va < vb:
            raise DivisionByZeroSeries(
                f"quotient has a pole of order {vb - va}; not representable as a power series"
            )
        return self._wrap(_series_div(a[vb:], b[vb:]))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, p: int):
        return self._wrap(_series_pow(self.coeffs, int(p)))

    def derivative(self) -> "JetSeries":
        if self.order == 0:
            raise ValueError("derivative of an order-0 jet carries no information")
        return self._wrap(_series_derivative(self.coeffs))

    def rescale(self, lam: complex) -> "JetSeries":
        """The jet of ``t -> g(lam * t)``."""
        return self._wrap(_series_rescale(self.coeffs, lam))

    def exp(self) -> "JetSeries":
        return self._wrap(_series_exp(self.coeffs))

    def truncate(self, order: int) -> "JetSeries":
        if order > self.order:
            raise ValueError("cannot extend a jet beyond its order")
        return self._wrap(self.coeffs[: order + 1])

    def derivatives(self) -> np.ndarray:
        """``g^{(j)}(base_point)`` for ``j = 0..K``."""
        fact = np.array([math.factorial(j) for j in range(self.order + 1)], dtype=float)
        return self.coeffs * fact

    def __call__(self, z: complex) -> complex:
        """Evaluate the truncated polynomial at an absolute point ``z``."""
        t = z - self.base_point
        acc = 0j
        for c in self.coeffs[::-1]:
            acc = acc * t + c
        return acc


def series_arith(op: str, a: JetSeries, b: Optional[JetSeries] = None, lam: Optional[complex] = None) -> JetSeries:
    """Dispatch a named arithmetic operation on jets."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "derivative":
        return a.derivative()
    if op == "rescale":
        if lam is None:
            raise ValueError("rescale needs lam")
        return a.rescale(lam)
    raise ValueError(f"unknown series operation {op!r}")


def vanishing_order(a: Union[JetSeries, np.ndarray], tau_rel: float = DEFAULT_TAU_REL):
    """Smallest ``k`` with ``|c_k| > tau_rel * max_j |c_j|``, or ``SATURATED``.

    ``SATURATED`` means every coefficient is zero to the relative threshold:
    the true order is at least ``K + 1`` and a deeper expansion is needed.
    """
    if tau_rel <= 0:
        raise ValueError("tau_rel must be positive")
    c = np.abs(np.asarray(a.coeffs if isinstance(a, JetSeries) else a))
    top = c.max() if c.size else 0.0
    if top == 0:
        return SATURATED
    hits = np.flatnonzero(c > tau_rel * top)
    return int(hits[0])
