"""Exact degree arithmetic for hypersurfaces admitting twisted jet differentials.

Only integers and :class:`fractions.Fraction` appear here; every comparison
is exact. For ``n >= 2`` and ``c >= 3``:

* ``k = n + 1``, ``k' = k(k+1)/2`` and ``delta = (k+1)n + k``;
* ``r0 = c delta^(k-1) k' + delta^(k-1) (delta+1)^2``;
* any ``d >= (r0 + k) delta + 2 delta`` splits as ``d = eps + (r + k) delta``
  with ``k <= eps <= k + delta - 1`` and ``r`` large enough that the
  slope ``m~(alpha) / m(alpha)`` eventually exceeds ``c``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import List, Optional

from .errors import BelowThreshold, BoundViolation, ParameterViolation, PreconditionViolation


def _check_nc(n: int, c: int) -> None:
    if int(n) != n or int(c) != c:
        raise ParameterViolation("n and c must be integers")
    if n < 2:
        raise ParameterViolation(f"n must be at least 2, got {n}")
    if c < 3:
        raise ParameterViolation(f"c must be at least 3, got {c}")


def r0_sum_form(n: int, c: int) -> Fraction:
    k = n + 1
    kp = k * (k + 1) // 2
    delta = (k + 1) * n + k
    return Fraction(c * delta ** (k - 1) * kp + delta ** (k - 1) * (delta + 1) ** 2)


def r0_product_form(n: int, c: int) -> Fraction:
    k = n + 1
    delta = (k + 1) * n + k
    return delta ** (k - 1) * (delta + 1) * (delta + 1 + Fraction(c, 2))


@dataclass(frozen=True)
class BrotbekParams:
    n: int
    c: int
    k: int
    kp: int
    delta: int
    r0: Fraction
    d: Optional[int] = None
    eps: Optional[int] = None
    r: Optional[int] = None
    beta: int = 0
    beta_t: int = 0
    alpha: Optional[int] = None
    m_alpha: Optional[int] = None
    mt_alpha: Optional[int] = None

    def __post_init__(self):
        _check_nc(self.n, self.c)
        if self.k != self.n + 1 or self.kp != self.k * (self.k + 1) // 2:
            raise BoundViolation("k or k' inconsistent with n")
        if self.delta != (self.k + 1) * self.n + self.k or self.delta != self.n**2 + 3 * self.n + 1:
            raise BoundViolation("delta inconsistent with n")
        if 2 * self.kp != self.delta + 1:
            raise BoundViolation("k' = (delta + 1)/2 fails")
        if self.r0 != r0_sum_form(self.n, self.c) or self.r0 != r0_product_form(self.n, self.c):
            raise BoundViolation("r0 does not match its closed forms")
        if self.beta < 0 or self.beta_t < 0:
            raise ParameterViolation("beta and beta~ must be nonnegative")
        if self.eps is not None:
            if not self.k <= self.eps <= self.k + self.delta - 1:
                raise BoundViolation("eps outside [k, k + delta - 1]")
            if self.d is not None and self.d != self.eps + (self.r + self.k) * self.delta:
                raise BoundViolation("d != eps + (r + k) delta")
        if self.alpha is not None:
            if self.m_alpha != self.beta + self.alpha * self.delta ** (self.k - 1) * self.kp:
                raise BoundViolation("m(alpha) inconsistent")
            g = self.r - self.delta ** (self.k - 1) * self.k * (self.eps + self.k * self.delta)
            if self.mt_alpha != self.alpha * g - self.beta_t:
                raise BoundViolation("m~(alpha) inconsistent")
            if not (self.mt_alpha > self.c * self.m_alpha and self.mt_alpha > 0):
                raise BoundViolation("m~(alpha) > c m(alpha) fails")

    @property
    def threshold(self) -> int:
        """Least integer ``d`` admitting the decomposition: ``ceil((r0 + k) delta + 2 delta)``."""
        return math.ceil((self.r0 + self.k) * self.delta + 2 * self.delta)

    def to_dict(self) -> dict:
        out = {}
        for key, value in asdict(self).items():
            out[key] = _jsonable(value)
        out["threshold"] = self.threshold
        return out


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return v


def params(n: int, c: int) -> BrotbekParams:
    _check_nc(n, c)
    k = n + 1
    kp = k * (k + 1) // 2
    delta = (k + 1) * n + k
    a, b = r0_sum_form(n, c), r0_product_form(n, c)
    if a != b:
        raise BoundViolation(f"r0 closed forms disagree: {a} vs {b}")
    return BrotbekParams(n, c, k, kp, delta, a)


def degree_bound(n: int, c: int) -> Fraction:
    """``(n+1)^(n+3) (n+1+c/2)^(n+3)``."""
    _check_nc(n, c)
    return Fraction(n + 1) ** (n + 3) * (n + 1 + Fraction(c, 2)) ** (n + 3)


@dataclass(frozen=True)
class Decomposition:
    eps: int
    r: int
    r_bound: int

    def to_dict(self) -> dict:
        return {"eps": self.eps, "r": self.r, "r_bound": self.r_bound}


def decompose(d: int, n: int, c: int) -> Decomposition:
    """``d = eps + (r + k) delta`` with ``eps`` in ``[k, k + delta - 1]``."""
    P = params(n, c)
    if d < P.threshold:
        raise BelowThreshold(f"d={d} is below (r0 + k) delta + 2 delta = {P.threshold}")
    k, delta, kp = P.k, P.delta, P.kp
    eps = k + (d - k) % delta
    q, rem = divmod(d - eps, delta)
    if rem:
        raise BoundViolation("eps is not congruent to d modulo delta")
    r = q - k
    base = delta ** (k - 1) * k * (eps + k * delta)
    r_bound = c * delta ** (k - 1) * kp + base
    if not r > r_bound:
        raise BoundViolation(f"r={r} does not exceed {r_bound}")
    if not r > base:
        raise BoundViolation(f"r={r} does not exceed {base}")
    if eps < k:
        raise BoundViolation("eps < k")
    return Decomposition(eps, r, r_bound)


@dataclass(frozen=True)
class ChainCheck:
    name: str
    lhs: Fraction
    relation: str
    rhs: Fraction
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": _jsonable(self.lhs), "relation": self.relation,
                "rhs": _jsonable(self.rhs), "passed": self.passed}


@dataclass(frozen=True)
class ChainReport:
    n: int
    c: int
    checks: List[ChainCheck] = field(default_factory=list)

    def __getitem__(self, name: str) -> ChainCheck:
        for chk in self.checks:
            if chk.name == name:
                return chk
        raise KeyError(name)

    @property
    def all_passed(self) -> bool:
        return all(chk.passed for chk in self.checks)

    def to_dict(self) -> dict:
        return {"n": self.n, "c": self.c, "all_passed": self.all_passed,
                "checks": [chk.to_dict() for chk in self.checks]}


def _cmp(name, lhs, rel, rhs) -> ChainCheck:
    lhs, rhs = Fraction(lhs), Fraction(rhs)
    ok = {"<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs, "==": lhs == rhs}[rel]
    return ChainCheck(name, lhs, rel, rhs, ok)


def verify_chain(n: int, c: int) -> ChainReport:
    """Every inequality on the way from ``r0`` to the final degree bound, exactly.

    ``a``: ``k(k + delta - 1 + k delta) < (delta + 1)^2``;
    ``b``: ``(r0 + k) delta + 2 delta <= (n^2+3n+2)^(n+2) (n^2+3n+2+c/2)``;
    ``c``: ``(n+1)(n+1+c/2) > n^2+3n+2+c/2`` (an equality when ``n(c-2) = 2``);
    ``d``: ``(r0 + k) delta + 2 delta < degree_bound(n, c)``.
    The two identities ``r0_dual`` and ``kprime`` are reported as well.
    """
    P = params(n, c)
    k, delta, kp = P.k, P.delta, P.kp
    half_c = Fraction(c, 2)
    top = (P.r0 + k) * delta + 2 * delta
    s = n * n + 3 * n + 2
    checks = [
        _cmp("r0_dual", r0_sum_form(n, c), "==", r0_product_form(n, c)),
        _cmp("kprime", 2 * kp, "==", delta + 1),
        _cmp("a", k * (k + delta - 1 + k * delta), "<", (delta + 1) ** 2),
        _cmp("b", top, "<=", Fraction(s) ** (n + 2) * (s + half_c)),
        _cmp("c", (n + 1) * (n + 1 + half_c), ">", s + half_c),
        _cmp("d", top, "<", degree_bound(n, c)),
    ]
    return ChainReport(n, c, checks)


@dataclass(frozen=True)
class AlphaThreshold:
    alpha_min: int
    m_alpha: int
    mt_alpha: int
    ratio_limit: Fraction

    def to_dict(self) -> dict:
        return {"alpha_min": self.alpha_min, "m_alpha": self.m_alpha, "mt_alpha": self.mt_alpha,
                "ratio_limit": _jsonable(self.ratio_limit)}


def alpha_threshold(P: BrotbekParams) -> AlphaThreshold:
    """Least ``alpha >= 0`` with ``m~(alpha) > c m(alpha)`` and ``m~(alpha) > 0``.

    ``m(alpha) = beta + alpha delta^(k-1) k'`` and
    ``m~(alpha) = alpha (r - delta^(k-1) k (eps + k delta)) - beta~``.
    """
    if P.eps is None or P.r is None:
        raise PreconditionViolation("eps and r must be set (see with_degree)")
    g = P.r - P.delta ** (P.k - 1) * P.k * (P.eps + P.k * P.delta)
    h = P.delta ** (P.k - 1) * P.kp
    if not g > P.c * h:
        raise PreconditionViolation(
            f"r={P.r} does not exceed c delta^(k-1) k' + delta^(k-1) k (eps + k delta) = {P.c * h + P.r - g}"
        )
    ratio = Fraction(g, h)
    if not ratio > P.c:
        raise BoundViolation("slope limit does not exceed c")
    need_slope = (P.beta_t + P.c * P.beta) // (g - P.c * h) + 1
    need_positive = P.beta_t // g + 1
    alpha = max(need_slope, need_positive, 0)
    m_a = P.beta + alpha * h
    mt_a = alpha * g - P.beta_t
    if not (mt_a > P.c * m_a and mt_a > 0):
        raise BoundViolation("alpha_min fails its defining inequality")
    if alpha > 0:
        prev_m, prev_mt = P.beta + (alpha - 1) * h, (alpha - 1) * g - P.beta_t
        if prev_mt > P.c * prev_m and prev_mt > 0:
            raise BoundViolation("alpha_min is not minimal")
    return AlphaThreshold(alpha, m_a, mt_a, ratio)


def with_degree(n: int, c: int, d: int, beta: int = 0, beta_t: int = 0) -> BrotbekParams:
    """Parameters for a concrete degree ``d``, including the least admissible ``alpha``."""
    P = params(n, c)
    dec = decompose(d, n, c)
    partial = BrotbekParams(n, c, P.k, P.kp, P.delta, P.r0, d, dec.eps, dec.r, beta, beta_t)
    at = alpha_threshold(partial)
    return BrotbekParams(n, c, P.k, P.kp, P.delta, P.r0, d, dec.eps, dec.r, beta, beta_t,
                         at.alpha_min, at.m_alpha, at.mt_alpha)


def report(n: int, c: int, d: Optional[int] = None, beta: int = 0, beta_t: int = 0) -> dict:
    """Everything above for one ``(n, c)``: parameters, bound, chain and (given ``d``) alpha."""
    P = params(n, c)
    out = {"params": P.to_dict(), "degree_bound": _jsonable(degree_bound(n, c)),
           "chain": verify_chain(n, c).to_dict()}
    if d is not None:
        full = with_degree(n, c, d, beta, beta_t)
        out["decomposition"] = decompose(d, n, c).to_dict()
        out["alpha"] = alpha_threshold(full).to_dict()
    return out
