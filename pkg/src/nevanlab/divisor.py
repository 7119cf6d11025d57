"""Hypersurfaces and hyperplane arrangements in ``P^n``, pullbacks, γ-constants."""

from __future__ import annotations

import enum
import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .curve import Add, Const, CurveExpr, HoloCurve, Mul, Pow, _normalize_constant
from .errors import DimensionMismatch, IdenticallyZero, NotHyperplanes, ParseError
from .jets import _series_mul, _series_pow

Monomial = Tuple[int, ...]

GENERAL_POSITION_TOL = 1e-10
ZERO_TEST_ORDER = 64
ZERO_TEST_TAU = 1e-9


class Undefined(enum.Enum):
    UNDEFINED = "UNDEFINED"

    def __repr__(self) -> str:
        return self.value


UNDEFINED = Undefined.UNDEFINED


@dataclass(frozen=True)
class LineBundleO:
    """The line bundle ``O(a)`` on ``P^n``."""

    a: int

    def __post_init__(self):
        if int(self.a) != self.a:
            raise ValueError("line bundle degree must be an integer")
        object.__setattr__(self, "a", int(self.a))


@dataclass(frozen=True)
class Hypersurface:
    """Zero set of a homogeneous polynomial ``Q`` of degree ``d`` in ``n+1`` variables."""

    n: int
    terms: Tuple[Tuple[Monomial, Union[Fraction, complex]], ...]

    def __init__(self, n: int, terms: Union[Mapping[Monomial, complex], Iterable[Tuple[Monomial, complex]]]):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: Dict[Monomial, Union[Fraction, complex]] = {}
        for mono, c in items:
            mono = tuple(int(a) for a in mono)
            if len(mono) != n + 1 or any(a < 0 for a in mono):
                raise DimensionMismatch(f"monomial {mono} does not live in {n + 1} variables")
            merged[mono] = merged.get(mono, 0) + _normalize_constant(c)
        merged = {m: _normalize_constant(c) for m, c in merged.items() if c != 0}
        if not merged:
            raise IdenticallyZero("Q is the zero polynomial")
        degrees = {sum(m) for m in merged}
        if len(degrees) != 1:
            raise ValueError(f"Q is not homogeneous: degrees {sorted(degrees)}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "terms", tuple(sorted(merged.items())))

    @classmethod
    def hyperplane(cls, coeffs: Sequence[complex]) -> "Hypersurface":
        n = len(coeffs) - 1
        terms = {}
        for i, c in enumerate(coeffs):
            if c != 0:
                mono = [0] * (n + 1)
                mono[i] = 1
                terms[tuple(mono)] = c
        return cls(n, terms)

    @property
    def d(self) -> int:
        return sum(self.terms[0][0])

    @property
    def coeff_norm(self) -> float:
        return max(abs(complex(c)) for _, c in self.terms)

    def hyperplane_coefficients(self) -> np.ndarray:
        if self.d != 1:
            raise NotHyperplanes(f"degree {self.d} hypersurface is not a hyperplane")
        v = np.zeros(self.n + 1, dtype=complex)
        for mono, c in self.terms:
            v[mono.index(1)] = complex(c)
        return v

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """``Q`` at points given along axis 0 (shape ``(n+1, ...)``)."""
        x = np.asarray(x)
        out = np.zeros(x.shape[1:], dtype=np.result_type(x.dtype, complex))
        for mono, c in self.terms:
            term = np.full(x.shape[1:], complex(c), dtype=out.dtype)
            for i, a in enumerate(mono):
                if a:
                    term = term * x[i] ** a
            out = out + term
        return out

    def term_jets(self, jets: np.ndarray) -> np.ndarray:
        """Jets of each monomial term along a curve; shape ``(terms, K+1, ...)``."""
        out = []
        for mono, c in self.terms:
            acc = None
            for i, a in enumerate(mono):
                if a:
                    p = _series_pow(jets[i], a)
                    acc = p if acc is None else _series_mul(acc, p)
            if acc is None:
                acc = np.zeros_like(jets[0])
                acc[0] = 1
            out.append(complex(c) * acc)
        return np.stack(out)

    def __mul__(self, other: "Hypersurface") -> "Hypersurface":
        if other.n != self.n:
            raise DimensionMismatch("ambient dimensions differ")
        prod: Dict[Monomial, complex] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = tuple(a + b for a, b in zip(m1, m2))
                prod[m] = prod.get(m, 0) + c1 * c2
        return Hypersurface(self.n, prod)

    # -- text format -------------------------------------------------------
    def to_dict(self) -> dict:
        return {"n": self.n, "d": self.d, "terms": [_fmt_term(m, c) for m, c in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Hypersurface":
        if "n" not in data or "terms" not in data:
            raise ParseError("hypersurface JSON needs 'n' and 'terms'")
        n = int(data["n"])
        terms: Dict[Monomial, complex] = {}
        for idx, text in enumerate(data["terms"]):
            try:
                mono, c = parse_term(str(text), n)
            except ParseError as exc:
                raise ParseError(f"terms[{idx}]: {exc.message}", exc.line, exc.column) from None
            terms[mono] = terms.get(mono, 0) + c
        hs = cls(n, terms)
        if "d" in data and int(data["d"]) != hs.d:
            raise DimensionMismatch(f"declared d={data['d']} but terms have degree {hs.d}")
        return hs

    @classmethod
    def from_json(cls, text: str) -> "Hypersurface":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return cls.from_dict(data)


def _fmt_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return f"({c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}i)"


def _fmt_term(mono: Monomial, c) -> str:
    factors = " ".join(f"x{i}^{a}" for i, a in enumerate(mono) if a)
    return f"{_fmt_coeff(c)} * {factors}" if factors else _fmt_coeff(c)


_COEFF = re.compile(
    r"\s*(?:\((?P<re>[-+]?[\d.eE+-]+?)(?P<sgn>[-+])(?P<im>[\d.eE+-]+)i\)|(?P<real>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?))\s*"
)
_FACTORS = {}


def _factor_re(var: str):
    if var not in _FACTORS:
        _FACTORS[var] = re.compile(r"\s*\*?\s*" + re.escape(var) + r"(?P<idx>\d+)(?:\s*\^\s*(?P<exp>\d+))?\s*")
    return _FACTORS[var]


def parse_term(text: str, n: int, var: str = "x", first: int = 0) -> Tuple[Monomial, Union[Fraction, complex]]:
    """Parse ``coefficient * x0^a0 ... xn^an`` (coefficient optional).

    ``var`` and ``first`` select the variable names; the chart polynomials of
    jet differentials use ``w1 .. wn``.
    """
    factor_re = _factor_re(var)
    last = first + n if first == 0 else first + n - 1
    pos = 0
    sign = 1
    bare = re.match(r"\s*([-+])\s*(?=[A-Za-z(])", text)
    if bare:
        sign = -1 if bare.group(1) == "-" else 1
        pos = bare.end()
    coeff: Union[Fraction, complex] = Fraction(1)
    m = _COEFF.match(text, pos)
    if m and m.end() > pos and (m.group("real") or m.group("re")):
        if m.group("real"):
            coeff = Fraction(m.group("real"))
        else:
            im = float(m.group("im")) * (1 if m.group("sgn") == "+" else -1)
            coeff = complex(float(m.group("re")), im)
        pos = m.end()
    exps = [0] * (last - first + 1)
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        fm = factor_re.match(text, pos)
        if not fm or fm.end() == pos:
            raise ParseError(f"cannot parse monomial factor {text[pos:]!r}", 1, pos + 1)
        idx = int(fm.group("idx"))
        if not first <= idx <= last:
            raise ParseError(f"variable {var}{idx} is outside {var}{first}..{var}{last}", 1, fm.start("idx"))
        exps[idx - first] += int(fm.group("exp") or 1)
        pos = fm.end()
    return tuple(exps), coeff * sign


@dataclass(frozen=True)
class Arrangement:
    members: Tuple[Hypersurface, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("an arrangement needs at least one member")
        if len({h.n for h in members}) != 1:
            raise DimensionMismatch("members live in different ambient dimensions")
        object.__setattr__(self, "members", members)

    @property
    def n(self) -> int:
        return self.members[0].n

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


def general_position(arr: Arrangement, tol: float = GENERAL_POSITION_TOL) -> bool:
    """Every ``min(q, n+1)`` coefficient vectors are linearly independent."""
    vecs = [h.hyperplane_coefficients() for h in arr]
    vecs = [v / np.linalg.norm(v) for v in vecs]
    size = min(len(vecs), arr.n + 1)
    for subset in itertools.combinations(range(len(vecs)), size):
        s = np.linalg.svd(np.array([vecs[i] for i in subset]), compute_uv=False)
        if s[-1] <= tol * s[0]:
            return False
    return True


def pullback_expr(f: HoloCurve, Q: Hypersurface) -> CurveExpr:
    """``Q(f_0, ..., f_n)`` as an expression tree (no degeneracy test)."""
    if f.n != Q.n:
        raise DimensionMismatch(f"curve lives in P^{f.n}, hypersurface in P^{Q.n}")
    expr: Optional[CurveExpr] = None
    for mono, c in Q.terms:
        term: CurveExpr = Const(c)
        for i, a in enumerate(mono):
            if a:
                factor = f.coords[i] if a == 1 else Pow(f.coords[i], a)
                term = factor if (isinstance(term, Const) and term.value == 1) else Mul(term, factor)
        expr = term if expr is None else Add(expr, term)
    return expr


def pullback_identically_zero(f: HoloCurve, Q: Hypersurface, seed: int = 0) -> bool:
    """Whether ``Q(f) == 0`` identically.

    Polynomial curves are decided exactly. Otherwise the jets of the
    monomial terms are summed to order 64 at three seeded random points and
    every coefficient of the sum is compared against the magnitudes of the
    terms that produced it.
    """
    if f.n != Q.n:
        raise DimensionMismatch(f"curve lives in P^{f.n}, hypersurface in P^{Q.n}")
    if f.is_polynomial():
        import sympy as sp

        return sp.expand(pullback_expr(f, Q).to_sympy(sp.Symbol("z"))) == 0
    rng = np.random.default_rng(seed)
    radius = 0.5 if np.isinf(f.R0) else 0.5 * f.R0
    pts = radius * np.sqrt(rng.uniform(0, 1, 3)) * np.exp(2j * np.pi * rng.uniform(0, 1, 3))
    pts = pts.astype(config.complex_dtype())
    jets = f.jets(pts, ZERO_TEST_ORDER)
    terms = Q.term_jets(jets)
    total = np.abs(terms.sum(axis=0))
    scale = np.abs(terms).sum(axis=0)
    return bool(np.all(total <= ZERO_TEST_TAU * scale))


def pullback(f: HoloCurve, Q: Hypersurface, seed: int = 0) -> CurveExpr:
    """The function ``Q(f)`` whose zeros are the intersections with ``{Q = 0}``."""
    expr = pullback_expr(f, Q)
    if pullback_identically_zero(f, Q, seed=seed):
        raise IdenticallyZero("f(B(R0)) lies inside the hypersurface")
    return expr


def gamma(D1: LineBundleO, D2: LineBundleO):
    """``inf{t : t*a1 + a2 > 0}`` on ``P^n``; ``UNDEFINED`` without a finite infimum."""
    a1, a2 = D1.a, D2.a
    if a1 > 0:
        return Fraction(-a2, a1)
    return UNDEFINED
