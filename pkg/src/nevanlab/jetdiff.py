"""Green-Griffiths jet differentials evaluated along curve jets.

A differential lives on one affine chart ``{x_c != 0}`` of ``P^n`` with
coordinates ``w_1..w_n`` (the ratios ``x_j / x_c`` for ``j != c`` in
increasing order of ``j``). Each term is

    coeff(w) * prod_{j,i} X_{j,i} ** alpha[j-1][i-1]

where ``X_{j,i}`` is the ``j``-th derivative of ``w_i`` along the curve, or
that derivative divided by ``w_i`` when ``i`` carries a logarithmic pole.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .curve import HoloCurve, _normalize_constant
from .divisor import Arrangement, Hypersurface, LineBundleO, parse_term, pullback
from .errors import (
    BoundViolation,
    DimensionMismatch,
    NotOnDivisor,
    ParseError,
    PoleAtEvaluationPoint,
    WeightedDegreeViolation,
)
from .jets import SATURATED, _series_derivative, _series_div, _series_mul, _series_pow, vanishing_order

Monomial = Tuple[int, ...]


@dataclass(frozen=True)
class JetTerm:
    """One monomial of a jet differential.

    ``coeff`` maps exponent tuples over ``w_1..w_n`` to coefficients,
    ``alpha[j-1][i-1]`` is the exponent of the ``j``-th derivative of ``w_i``
    and ``log_flags`` holds the 1-based indices ``i`` with a ``1/w_i`` pole.
    """

    coeff: Tuple[Tuple[Monomial, Union[Fraction, complex]], ...]
    alpha: Tuple[Tuple[int, ...], ...]
    log_flags: FrozenSet[int] = frozenset()

    def __init__(self, coeff, alpha, log_flags=()):
        if not isinstance(coeff, Mapping) and not isinstance(coeff, (list, tuple)):
            coeff = {None: coeff}
        items = coeff.items() if isinstance(coeff, Mapping) else coeff
        alpha = tuple(tuple(int(a) for a in row) for row in alpha)
        n = len(alpha[0]) if alpha else 0
        merged: Dict[Monomial, Union[Fraction, complex]] = {}
        for mono, c in items:
            mono = (0,) * n if mono is None else tuple(int(a) for a in mono)
            merged[mono] = merged.get(mono, 0) + _normalize_constant(c)
        object.__setattr__(self, "coeff", tuple(sorted((m, c) for m, c in merged.items() if c != 0)))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "log_flags", frozenset(int(i) for i in log_flags))

    @property
    def weighted_degree(self) -> int:
        return sum((j + 1) * sum(row) for j, row in enumerate(self.alpha))


@dataclass(frozen=True)
class GGJetDifferential:
    """A jet differential of order ``k`` and weighted degree ``m`` on a chart of ``P^n``.

    ``twist`` is the line bundle ``L`` whose dual the differential takes
    values in; the Fubini-Study weight of ``O(-a)`` is ``(|f_c| / ||f||)**a``.
    ``divisor_coords`` lists the chart coordinates (1-based) whose zero sets
    are components of the boundary divisor; logarithmic poles are allowed
    only there. ``None`` means "whatever the terms flag".
    """

    k: int
    m: int
    n: int
    chart: int
    terms: Tuple[JetTerm, ...]
    twist: LineBundleO = field(default_factory=lambda: LineBundleO(0))
    divisor_coords: Optional[FrozenSet[int]] = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.k < 1 or self.m < 0 or self.n < 1:
            raise ValueError("need k >= 1, m >= 0, n >= 1")
        if not 0 <= self.chart <= self.n:
            raise DimensionMismatch(f"chart index {self.chart} is not a coordinate of P^{self.n}")
        if self.divisor_coords is not None:
            object.__setattr__(self, "divisor_coords", frozenset(self.divisor_coords))
        for t in self.terms:
            if len(t.alpha) != self.k or any(len(row) != self.n for row in t.alpha):
                raise DimensionMismatch(f"alpha must be a {self.k} x {self.n} array")
            if any(a < 0 for row in t.alpha for a in row):
                raise ValueError("exponents must be nonnegative")
            if any(len(mono) != self.n for mono, _ in t.coeff):
                raise DimensionMismatch("coefficient polynomial must use w1..wn")
            if any(not 1 <= i <= self.n for i in t.log_flags):
                raise DimensionMismatch(f"log flag outside 1..{self.n}")
            if self.divisor_coords is not None and not t.log_flags <= self.divisor_coords:
                raise ValueError("logarithmic poles are allowed only along declared divisor components")
        self.check_weighted_degree()

    def check_weighted_degree(self) -> None:
        for idx, t in enumerate(self.terms):
            if t.weighted_degree != self.m:
                raise WeightedDegreeViolation(
                    f"term {idx} has weighted degree {t.weighted_degree}, expected {self.m}"
                )

    def chart_indices(self) -> List[int]:
        return [j for j in range(self.n + 1) if j != self.chart]

    # -- evaluation --------------------------------------------------------
    def eval_chart_jets(self, w: np.ndarray) -> np.ndarray:
        """Evaluate on chart-coordinate jets ``w`` of shape ``(n, K+1, ...)``, ``K >= k``.

        ``w[i, j]`` is the Taylor coefficient, so the ``j``-th derivative is
        ``j! * w[i, j]``.
        """
        self.check_weighted_degree()
        w = np.asarray(w)
        fact = np.array([math.factorial(j) for j in range(self.k + 1)], dtype=float)
        fact = fact.reshape((1, self.k + 1) + (1,) * (w.ndim - 2))
        D = w[:, : self.k + 1] * fact
        values = D[:, 0]
        flagged = sorted({i for t in self.terms for i in t.log_flags})
        for i in flagged:
            if np.any(values[i - 1] == 0):
                raise PoleAtEvaluationPoint(f"w{i} vanishes at the evaluation point")
        out = np.zeros(w.shape[2:], dtype=w.dtype)
        for t in self.terms:
            coef = np.zeros(w.shape[2:], dtype=w.dtype)
            for mono, c in t.coeff:
                part = np.full(w.shape[2:], complex(c), dtype=w.dtype)
                for i, a in enumerate(mono):
                    if a:
                        part = part * values[i] ** a
                coef = coef + part
            mon = coef
            for j, row in enumerate(t.alpha, start=1):
                for i, a in enumerate(row, start=1):
                    if a:
                        x = D[i - 1, j]
                        if i in t.log_flags:
                            x = x / values[i - 1]
                        mon = mon * x**a
            out = out + mon
        return out

    def chart_jets(self, f: HoloCurve, z0, K: Optional[int] = None) -> np.ndarray:
        """Jets of ``w_i = f_{j_i} / f_chart`` at ``z0`` (batched)."""
        K = self.k if K is None else K
        f.check_domain(z0)
        if f.n != self.n:
            raise DimensionMismatch(f"curve lives in P^{f.n}, differential on P^{self.n}")
        J = f.jets(z0, K)
        fc = J[self.chart]
        if np.any(fc[0] == 0):
            raise PoleAtEvaluationPoint(f"chart coordinate f_{self.chart} vanishes at the evaluation point")
        return np.stack([_series_div(J[j], fc) for j in self.chart_indices()])

    def evaluate(self, f: HoloCurve, z0) -> np.ndarray:
        return self.eval_chart_jets(self.chart_jets(f, z0))

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        from .divisor import _fmt_coeff

        terms = []
        for t in self.terms:
            coeff = []
            for mono, c in t.coeff:
                factors = " ".join(f"w{i + 1}^{a}" for i, a in enumerate(mono) if a)
                coeff.append(f"{_fmt_coeff(c)} * {factors}" if factors else _fmt_coeff(c))
            terms.append({"coeff_poly": coeff, "alpha": [list(r) for r in t.alpha], "log_flags": sorted(t.log_flags)})
        out = {"k": self.k, "m": self.m, "n": self.n, "chart": self.chart, "twist": self.twist.a, "terms": terms}
        if self.divisor_coords is not None:
            out["divisor_coords"] = sorted(self.divisor_coords)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "GGJetDifferential":
        try:
            k, m, n = int(data["k"]), int(data["m"]), int(data["n"])
        except KeyError as exc:
            raise ParseError(f"jet differential JSON is missing {exc.args[0]!r}") from None
        terms = []
        for idx, t in enumerate(data.get("terms", [])):
            raw = t.get("coeff_poly", "1")
            if isinstance(raw, (int, float)):
                raw = [str(raw)]
            elif isinstance(raw, str):
                raw = [raw]
            coeff: Dict[Monomial, complex] = {}
            for s in raw:
                try:
                    mono, c = parse_term(str(s), n, var="w", first=1)
                except ParseError as exc:
                    raise ParseError(f"terms[{idx}].coeff_poly: {exc.message}", exc.line, exc.column) from None
                coeff[mono] = coeff.get(mono, 0) + c
            terms.append(JetTerm(coeff, t["alpha"], t.get("log_flags", ())))
        twist = data.get("twist", 0)
        if isinstance(twist, dict):
            twist = twist["a"]
        dc = data.get("divisor_coords")
        return cls(k, m, n, int(data.get("chart", 0)), tuple(terms), LineBundleO(int(twist)),
                   None if dc is None else frozenset(dc))

    @classmethod
    def from_json(cls, text: str) -> "GGJetDifferential":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return cls.from_dict(data)


def jetdiff_eval(P: GGJetDifferential, f: HoloCurve, z0: complex) -> complex:
    return complex(P.evaluate(f, np.asarray(z0, dtype=config.complex_dtype()))[()])


def metric_norm_eval(P: GGJetDifferential, f: HoloCurve, z0: complex) -> float:
    """``|P(j_k f)(z0)|`` measured with the Fubini-Study metric of the twist."""
    z = np.asarray(z0, dtype=config.complex_dtype())
    value = abs(complex(P.evaluate(f, z)[()]))
    a = -P.twist.a
    if a == 0:
        return value
    log_weight = np.log(np.abs(f.values(z)[P.chart])) - f.log_norm(z)
    return float(value * np.exp(a * log_weight))


def metric_norm_log(P: GGJetDifferential, f: HoloCurve, z) -> np.ndarray:
    """Vectorized ``log`` of :func:`metric_norm_eval` on an array of points."""
    z = np.asarray(z, dtype=config.complex_dtype())
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(P.evaluate(f, z)))
    a = -P.twist.a
    if a:
        out = out + a * (np.log(np.abs(f.values(z)[P.chart])) - f.log_norm(z))
    return out


# ---------------------------------------------------------------------------
# Wronskians
# ---------------------------------------------------------------------------


def batched_det(M: np.ndarray) -> np.ndarray:
    """Determinant over the last two axes by Gaussian elimination with partial pivoting.

    Written out by hand so extended-precision dtypes are supported.
    """
    A = np.array(M, copy=True)
    N = A.shape[-1]
    det = np.ones(A.shape[:-2], dtype=A.dtype)
    for col in range(N):
        piv = np.argmax(np.abs(A[..., col:, col]), axis=-1) + col
        if np.any(piv != col):
            idx = np.indices(piv.shape)
            rows_piv = A[(*idx, piv)].copy()
            rows_col = A[..., col, :].copy()
            A[..., col, :] = rows_piv
            A[(*idx, piv)] = rows_col
            det = np.where(piv != col, -det, det)
        p = A[..., col, col]
        det = det * p
        safe = np.where(p == 0, 1, p)
        factors = A[..., col + 1 :, col] / safe[..., None]
        factors = np.where((p == 0)[..., None], 0, factors)
        A[..., col + 1 :, :] -= factors[..., None] * A[..., col : col + 1, :]
    return det


def wronskian_from_jets(jets: np.ndarray, k: Optional[int] = None) -> np.ndarray:
    """``det(d^i f_j)`` for ``0 <= i, j <= k`` from coordinate jets ``(n+1, K+1, ...)``."""
    jets = np.asarray(jets)
    k = jets.shape[0] - 1 if k is None else k
    if k + 1 > jets.shape[0]:
        raise DimensionMismatch(f"a Wronskian of order {k} needs {k + 1} coordinates")
    if jets.shape[1] < k + 1:
        raise ValueError(f"jets of order >= {k} are required")
    fact = np.array([math.factorial(i) for i in range(k + 1)], dtype=float)
    D = jets[: k + 1, : k + 1] * fact.reshape((1, k + 1) + (1,) * (jets.ndim - 2))
    # D[j, i] = i-th derivative of coordinate j; the matrix wants rows i, cols j.
    M = np.moveaxis(D, (0, 1), (-1, -2))
    return batched_det(M)


def wronskian_eval(f: HoloCurve, z0: complex, k: Optional[int] = None) -> complex:
    k = f.n if k is None else k
    if k + 1 > f.n + 1:
        raise DimensionMismatch(f"a Wronskian of order {k} needs {k + 1} coordinates; curve has {f.n + 1}")
    f.check_domain(z0)
    z = np.asarray(z0, dtype=config.complex_dtype())
    return complex(wronskian_from_jets(f.jets(z, k), k)[()])


def wronskian_grid(f: HoloCurve, z, k: Optional[int] = None) -> np.ndarray:
    k = f.n if k is None else k
    z = np.asarray(z, dtype=config.complex_dtype())
    return wronskian_from_jets(f.jets(z, k), k)


# ---------------------------------------------------------------------------
# orders along divisors
# ---------------------------------------------------------------------------

TRUNCATION_TAU = 1e-9


def _adaptive_order(series_fn, start: int, tau: float = TRUNCATION_TAU, cap: int = 256):
    K = start
    while True:
        c = series_fn(K)
        v = vanishing_order(c, tau)
        if v is not SATURATED or K >= cap:
            return v, c, K
        K *= 2


def truncation_order(f: HoloCurve, H: Hypersurface, z0: complex, k: int, tau: float = TRUNCATION_TAU) -> int:
    """``nu - min(k, nu)`` with ``nu`` the order of ``f^*H`` at ``z0``.

    Computed twice, once from ``nu`` and once as the minimum order of the
    derivatives of order ``0..k`` of the pullback; the two must agree.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    g = pullback(f, H)
    f.check_domain(z0)
    z = np.asarray(z0, dtype=config.complex_dtype())
    nu, c, K = _adaptive_order(lambda K: g.jet(z, K), max(2 * k + 8, 16), tau)
    if nu is SATURATED:
        raise BoundViolation("pullback vanishes to every available order at z0")
    if nu == 0:
        raise NotOnDivisor(f"f(z0) does not lie on the hypersurface")
    direct = nu - min(k, nu)
    orders = []
    d = np.asarray(c)
    for l in range(k + 1):
        if l:
            d = _series_derivative(d)
        v = vanishing_order(d, tau)
        orders.append(d.shape[0] if v is SATURATED else v)
    via_derivatives = min(orders)
    if via_derivatives != direct:
        raise BoundViolation(f"truncation routes disagree: {direct} vs {via_derivatives}")
    return direct


def _laurent_leading(c: np.ndarray, tau: float):
    v = vanishing_order(c, tau)
    return (c.shape[0], c) if v is SATURATED else (v, c[v:])


def pole_order(P: GGJetDifferential, f: HoloCurve, z0: complex, tau: float = TRUNCATION_TAU, extra: int = 24) -> int:
    """Order of the pole of ``P(j_k f)`` at ``z0`` (0 when holomorphic there)."""
    z = np.asarray(z0, dtype=config.complex_dtype())
    P.check_weighted_degree()
    K = P.k + extra + 8 * (P.m + 1)
    w = P.chart_jets(f, z, K)
    vals = {}
    for i in range(P.n):
        vals[i + 1] = _laurent_leading(w[i], tau)
    L = K - P.k - 2 * (P.m + 1)  # trustworthy length of every product below

    def deriv(i, j):
        c = w[i - 1]
        for _ in range(j):
            c = _series_derivative(c)
        return c

    pieces = []
    for t in P.terms:
        val = 0
        coef = np.zeros(K + 1, dtype=w.dtype)
        for mono, c in t.coeff:
            part = np.zeros(K + 1, dtype=w.dtype)
            part[0] = complex(c)
            for i, a in enumerate(mono):
                if a:
                    part = _series_mul(part, _series_pow(w[i], a))
            coef = coef + part
        v0, s = _laurent_leading(coef, tau)
        if v0 >= K:
            continue
        val += v0
        ser = s
        for j, row in enumerate(t.alpha, start=1):
            for i, a in enumerate(row, start=1):
                if not a:
                    continue
                dv, ds = _laurent_leading(deriv(i, j), tau)
                if i in t.log_flags:
                    wv, ws = vals[i]
                    dv -= wv
                    n_ = min(ds.shape[0], ws.shape[0])
                    ds = _series_div(ds[:n_], ws[:n_])
                for _ in range(a):
                    val += dv
                    n_ = min(ser.shape[0], ds.shape[0])
                    ser = _series_mul(ser[:n_], ds[:n_])
        pieces.append((val, ser))
    if not pieces:
        return 0
    low = min(v for v, _ in pieces)
    length = min(L, min(v - low + s.shape[0] for v, s in pieces))
    total = np.zeros(length, dtype=w.dtype)
    for v, s in pieces:
        off = v - low
        if off < length:
            total[off:length] += s[: length - off]
    lead = vanishing_order(total, tau)
    if lead is SATURATED:
        return 0
    return max(0, -(low + lead))


# ---------------------------------------------------------------------------
# exact Wronskian truncation check for polynomial curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationCheckRow:
    factor: str
    wronskian_order: int
    required: int

    @property
    def ok(self) -> bool:
        return self.wronskian_order >= self.required


def _poly_order(p, q) -> int:
    import sympy as sp

    if p.is_zero:
        raise ValueError("order of the zero polynomial is infinite")
    count = 0
    while True:
        quo, rem = sp.div(p, q)
        if not rem.is_zero:
            return count
        p = quo
        count += 1


def hyperplane_truncation_check(f: HoloCurve, arr: Arrangement) -> List[TruncationCheckRow]:
    """Compare ``ord W(j_n f)`` with ``sum_j max(ord f^*H_j - n, 0)`` at every zero.

    Exact: the Wronskian and the pullbacks are sympy polynomials, and the
    zeros are grouped by irreducible factor over the Gaussian rationals.
    """
    import sympy as sp

    if not f.is_polynomial():
        raise TypeError("the exact truncation check needs a polynomial curve")
    if arr.n != f.n:
        raise DimensionMismatch("arrangement and curve live in different P^n")
    z = sp.Symbol("z")
    polys = f.exact_polys
    n = f.n
    M = sp.Matrix(n + 1, n + 1, lambda i, j: sp.diff(polys[j].as_expr(), z, i))
    W = sp.Poly(sp.expand(M.det()), z)
    if W.is_zero:
        raise BoundViolation("the Wronskian vanishes identically: the curve is linearly degenerate")
    pulls = []
    for H in arr:
        vec = _exact_coeffs(H)
        expr = sum(v * p.as_expr() for v, p in zip(vec, polys))
        pulls.append(sp.Poly(sp.expand(expr), z))
    factors = {}
    for p in pulls:
        if p.is_zero:
            raise BoundViolation("a hyperplane contains the curve")
        if p.degree() == 0:
            continue
        _, flist = sp.factor_list(p.as_expr(), z, gaussian=True)
        for fac, _e in flist:
            fp = sp.Poly(fac, z).monic()
            factors[str(fp.as_expr())] = fp
    rows = []
    for key in sorted(factors):
        q = factors[key]
        need = sum(max(_poly_order(p, q) - n, 0) for p in pulls if p.degree() > 0)
        rows.append(TruncationCheckRow(key, _poly_order(W, q), need))
    return rows


def _exact_coeffs(H: Hypersurface):
    import sympy as sp

    if H.d != 1:
        from .errors import NotHyperplanes

        raise NotHyperplanes("truncation check is for hyperplanes")
    out = [sp.Integer(0)] * (H.n + 1)
    for mono, c in H.terms:
        if isinstance(c, Fraction):
            val = sp.Rational(c.numerator, c.denominator)
        else:
            val = sp.nsimplify(c.real) + sp.I * sp.nsimplify(c.imag)
        out[mono.index(1)] = val
    return out
