"""Holomorphic curves ``f: B(R0) -> P^n`` given by entire coordinate expressions.

Coordinates are small expression trees in one complex variable ``z``.
Every node knows how to produce its Taylor jet at a batch of base points by
structural recursion, so values, derivatives and jets all come from the same
code path and no finite differences are ever taken.

Text grammar (also used by the JSON curve format)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*          division by constants only
    unary := "-" unary | power
    power := atom [("^" | "**") INT]
    atom  := NUM | NUM "i" | "i" | "z" | "exp" "(" expr ")" | "(" expr ")"

``exp`` only accepts polynomial arguments, which keeps every coordinate
entire.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .errors import (
    AllCoordinatesVanish,
    DimensionMismatch,
    NotReduced,
    OutsideDomain,
    ParseError,
)
from .jets import (
    JetSeries,
    SATURATED,
    _series_compose,
    _series_div,
    _series_exp,
    _series_mul,
    _series_pow,
    vanishing_order,
)

Number = Union[int, float, complex, Fraction]


def _normalize_constant(value: Number) -> Union[Fraction, complex]:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    c = complex(value)
    if c.imag == 0:
        return Fraction(c.real)
    return c


def _constant_to_dtype(value: Union[Fraction, complex], dtype) -> np.ndarray:
    if isinstance(value, Fraction):
        if dtype == np.clongdouble:
            return np.asarray(np.longdouble(value.numerator) / np.longdouble(value.denominator), dtype=dtype)
        return np.asarray(float(value), dtype=dtype)
    return np.asarray(value, dtype=dtype)


def _fmt_constant(value: Union[Fraction, complex]) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            s = str(value.numerator)
        else:
            s = f"{value.numerator}/{value.denominator}"
        return s if value >= 0 and value.denominator == 1 else f"({s})"
    re_part, im_part = value.real, value.imag
    sign = "+" if im_part >= 0 or math.isnan(im_part) else "-"
    return f"({re_part!r}{sign}{abs(im_part)!r}i)"


class CurveExpr:
    """Base class of coordinate expression nodes."""

    def jet(self, z0, K: int) -> np.ndarray:
        """Taylor coefficients at every point of ``z0``; shape ``(K+1,) + shape(z0)``."""
        z0 = np.asarray(z0, dtype=config.complex_dtype())
        return self._jet(z0, K)

    def _jet(self, z0: np.ndarray, K: int) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, z) -> np.ndarray:
        return self.jet(z, 0)[0]

    def is_polynomial(self) -> bool:
        raise NotImplementedError

    def to_sympy(self, zsym):
        raise NotImplementedError

    def substitute(self, inner: "CurveExpr") -> "CurveExpr":
        """Structural substitution ``z -> inner`` (no composition node)."""
        raise NotImplementedError

    # arithmetic sugar
    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Add(self, Mul(Const(-1), as_expr(other)))

    def __rsub__(self, other):
        return Add(as_expr(other), Mul(Const(-1), self))

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __neg__(self):
        return Mul(Const(-1), self)

    def __pow__(self, p: int):
        return Pow(self, int(p))


def as_expr(x) -> CurveExpr:
    if isinstance(x, CurveExpr):
        return x
    if isinstance(x, str):
        return parse_expr(x)
    return Const(x)


def _zeros(z0: np.ndarray, K: int) -> np.ndarray:
    return np.zeros((K + 1,) + z0.shape, dtype=z0.dtype)


@dataclass(frozen=True)
class Const(CurveExpr):
    value: Union[Fraction, complex]

    def __post_init__(self):
        object.__setattr__(self, "value", _normalize_constant(self.value))

    def _jet(self, z0, K):
        out = _zeros(z0, K)
        out[0] = _constant_to_dtype(self.value, z0.dtype)
        return out

    def is_polynomial(self):
        return True

    def to_sympy(self, zsym):
        import sympy as sp

        v = self.value
        if isinstance(v, Fraction):
            return sp.Rational(v.numerator, v.denominator)
        re_, im_ = Fraction(v.real), Fraction(v.imag)
        return sp.Rational(re_.numerator, re_.denominator) + sp.I * sp.Rational(im_.numerator, im_.denominator)

    def substitute(self, inner):
        return self

    def __str__(self):
        return _fmt_constant(self.value)


@dataclass(frozen=True)
class Var(CurveExpr):
    def _jet(self, z0, K):
        out = _zeros(z0, K)
        out[0] = z0
        if K >= 1:
            out[1] = 1
        return out

    def is_polynomial(self):
        return True

    def to_sympy(self, zsym):
        return zsym

    def substitute(self, inner):
        return inner

    def __str__(self):
        return "z"


@dataclass(frozen=True)
class Add(CurveExpr):
    left: CurveExpr
    right: CurveExpr

    def _jet(self, z0, K):
        return self.left._jet(z0, K) + self.right._jet(z0, K)

    def is_polynomial(self):
        return self.left.is_polynomial() and self.right.is_polynomial()

    def to_sympy(self, zsym):
        return self.left.to_sympy(zsym) + self.right.to_sympy(zsym)

    def substitute(self, inner):
        return Add(self.left.substitute(inner), self.right.substitute(inner))

    def __str__(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True)
class Mul(CurveExpr):
    left: CurveExpr
    right: CurveExpr

    def _jet(self, z0, K):
        return _series_mul(self.left._jet(z0, K), self.right._jet(z0, K))

    def is_polynomial(self):
        return self.left.is_polynomial() and self.right.is_polynomial()

    def to_sympy(self, zsym):
        return self.left.to_sympy(zsym) * self.right.to_sympy(zsym)

    def substitute(self, inner):
        return Mul(self.left.substitute(inner), self.right.substitute(inner))

    def __str__(self):
        return f"{self.left}*{self.right}"


@dataclass(frozen=True)
class Pow(CurveExpr):
    base: CurveExpr
    exponent: int

    def __post_init__(self):
        if int(self.exponent) != self.exponent or self.exponent < 0:
            raise ValueError("Pow needs a nonnegative integer exponent")
        object.__setattr__(self, "exponent", int(self.exponent))

    def _jet(self, z0, K):
        return _series_pow(self.base._jet(z0, K), self.exponent)

    def is_polynomial(self):
        return self.base.is_polynomial()

    def to_sympy(self, zsym):
        return self.base.to_sympy(zsym) ** self.exponent

    def substitute(self, inner):
        return Pow(self.base.substitute(inner), self.exponent)

    def __str__(self):
        return f"({self.base})^{self.exponent}"


@dataclass(frozen=True)
class Exp(CurveExpr):
    arg: CurveExpr

    def __post_init__(self):
        if not self.arg.is_polynomial():
            raise ValueError("exp() takes polynomial arguments only")

    def _jet(self, z0, K):
        return _series_exp(self.arg._jet(z0, K))

    def is_polynomial(self):
        return False

    def to_sympy(self, zsym):
        import sympy as sp

        return sp.exp(self.arg.to_sympy(zsym))

    def substitute(self, inner):
        return Exp(self.arg.substitute(inner))

    def __str__(self):
        return f"exp({self.arg})"


@dataclass(frozen=True)
class Compose(CurveExpr):
    """``outer(inner(z))`` with a polynomial ``inner``."""

    outer: CurveExpr
    inner: CurveExpr

    def __post_init__(self):
        if not self.inner.is_polynomial():
            raise ValueError("Compose needs a polynomial inner expression")

    def _jet(self, z0, K):
        inner = self.inner._jet(z0, K)
        outer = self.outer._jet(inner[0], K)
        shifted = inner.copy()
        shifted[0] = 0
        return _series_compose(outer, shifted)

    def is_polynomial(self):
        return self.outer.is_polynomial()

    def to_sympy(self, zsym):
        return self.outer.to_sympy(zsym).subs(zsym, self.inner.to_sympy(zsym))

    def substitute(self, inner):
        return Compose(self.outer, self.inner.substitute(inner))

    def expand(self) -> CurveExpr:
        return self.outer.substitute(self.inner)

    def __str__(self):
        return str(self.expand())


@dataclass(frozen=True)
class ZDeflate(CurveExpr):
    """``inner(z) / z**nu`` where ``inner`` vanishes to order ``>= nu`` at 0."""

    inner: CurveExpr
    nu: int

    def _jet(self, z0, K):
        deep = self.inner._jet(z0, K + self.nu)
        at_origin = z0 == 0
        safe = np.where(at_origin, 1, z0)
        zpow = np.zeros_like(deep)
        zpow[0] = safe
        if K + self.nu >= 1:
            zpow[1] = 1
        zpow = _series_pow(zpow, self.nu)
        regular = _series_div(deep, zpow)[: K + 1]
        shifted = deep[self.nu : self.nu + K + 1]
        return np.where(at_origin, shifted, regular)

    def is_polynomial(self):
        return self.inner.is_polynomial()

    def to_sympy(self, zsym):
        import sympy as sp

        return sp.cancel(self.inner.to_sympy(zsym) / zsym**self.nu)

    def substitute(self, inner):
        raise NotImplementedError("ZDeflate does not support substitution")

    def __str__(self):
        raise ValueError("deflated coordinates have no text form")


def polynomial_from_coefficients(coeffs: Sequence[Number]) -> CurveExpr:
    """Build ``sum c_k z**k`` (ascending coefficients)."""
    expr: Optional[CurveExpr] = None
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        term: CurveExpr = Const(c) if k == 0 else Mul(Const(c), Pow(Var(), k))
        expr = term if expr is None else Add(expr, term)
    return expr if expr is not None else Const(0)


def _from_sympy_poly(poly) -> CurveExpr:
    import sympy as sp

    expr: Optional[CurveExpr] = None
    for k, c in enumerate(reversed(poly.all_coeffs())):
        if c == 0:
            continue
        re_, im_ = sp.re(c), sp.im(c)
        coeff: CurveExpr = Const(Fraction(int(re_.p), int(re_.q)))
        if im_ != 0:
            # Gaussian rationals stay exact as re + im * i
            coeff = Add(coeff, Mul(Const(Fraction(int(im_.p), int(im_.q))), Const(1j)))
        term = coeff if k == 0 else Mul(coeff, Pow(Var(), k))
        expr = term if expr is None else Add(expr, term)
    return expr if expr is not None else Const(0)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z_]))?"
    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", *_linecol(text, pos))
        start = pos + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("num") is not None:
            tokens.append(("num", (m.group("num"), m.group("imag") is not None), start))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), start))
        else:
            tokens.append(("op", m.group("op"), start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def _linecol(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def error(self, msg: str, tok=None):
        tok = tok or self.tokens[self.i]
        raise ParseError(msg, *_linecol(self.text, tok[2]))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected {op!r}", tok)
        return tok

    def parse(self) -> CurveExpr:
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected trailing input")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Add(e, Mul(Const(-1), rhs))
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            tok = self.take()
            rhs = self.unary()
            if tok[1] == "*":
                e = Mul(e, rhs)
            else:
                if not isinstance(rhs, Const):
                    self.error("division is only allowed by a numeric constant", tok)
                if rhs.value == 0:
                    self.error("division by zero", tok)
                e = Mul(e, Const(1 / rhs.value))
        return e

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Mul(Const(-1), inner)
        if self.peek()[0] == "op" and self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] in ("^", "**"):
            self.take()
            tok = self.take()
            if tok[0] != "num" or tok[1][1] or not re.fullmatch(r"\d+", tok[1][0]):
                self.error("exponent must be a nonnegative integer literal", tok)
            return Pow(base, int(tok[1][0]))
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            text, imag = val
            num = Fraction(text)
            return Const(complex(0, float(num))) if imag else Const(num)
        if kind == "name":
            if val == "z":
                return Var()
            if val == "i":
                return Const(1j)
            if val == "exp":
                self.expect_op("(")
                arg_tok = self.peek()
                arg = self.expr()
                self.expect_op(")")
                if not arg.is_polynomial():
                    self.error("exp() argument must be a polynomial in z", arg_tok)
                return Exp(arg)
            self.error(f"unknown name {val!r}", tok)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        self.error("unexpected token" if kind != "end" else "unexpected end of input", tok)


def parse_expr(text: str) -> CurveExpr:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


def _sympy_poly(expr: CurveExpr, zsym):
    import sympy as sp

    return sp.Poly(sp.expand(expr.to_sympy(zsym)), zsym)


@dataclass(frozen=True)
class HoloCurve:
    """A reduced representation ``f = [f_0 : ... : f_n]`` on ``B(R0)``.

    If every coordinate vanishes at the origin the tuple is divided by the
    common power of ``z`` (exactly for polynomial tuples, through a
    deflation node otherwise) so that ``f(0)`` is a genuine point.
    """

    coords: Tuple[CurveExpr, ...]
    R0: float = math.inf
    recentered_by: int = field(default=0, compare=False)

    def __post_init__(self):
        coords = tuple(as_expr(c) for c in self.coords)
        if len(coords) < 2:
            raise DimensionMismatch("a curve into P^n needs at least two coordinates")
        R0 = math.inf if self.R0 is None else float(self.R0)
        if not R0 > 0:
            raise ValueError("R0 must be positive")
        object.__setattr__(self, "R0", R0)
        if all(isinstance(c, Const) for c in coords) and all(c.value == 0 for c in coords):
            raise AllCoordinatesVanish("all coordinates are identically zero")
        coords, nu = self._recenter(coords)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "recentered_by", nu)

    @staticmethod
    def _recenter(coords):
        if all(c.is_polynomial() for c in coords):
            import sympy as sp

            z = sp.Symbol("z")
            polys = [_sympy_poly(c, z) for c in coords]
            nonzero = [p for p in polys if not p.is_zero]
            if not nonzero:
                raise AllCoordinatesVanish("all coordinates are identically zero")
            g = nonzero[0]
            for p in nonzero[1:]:
                g = sp.gcd(g, p)
            if g.degree() <= 0:
                return coords, 0
            nu = 0
            coeffs = list(reversed(g.all_coeffs()))
            while coeffs[nu] == 0:
                nu += 1
            if g.degree() > nu:
                raise NotReduced(f"coordinates share the nontrivial factor {g.as_expr()}")
            zp = sp.Poly(z**nu, z)
            return tuple(_from_sympy_poly(sp.div(p, zp)[0]) for p in polys), nu

        origin = np.zeros((), dtype=config.complex_dtype())
        orders = []
        for c in coords:
            v = vanishing_order(c.jet(origin, 64))
            if v is not SATURATED:
                orders.append(v)
        if not orders:
            raise AllCoordinatesVanish("all coordinates vanish to order 64 at the origin")
        nu = min(orders)
        if nu == 0:
            return coords, 0
        return tuple(ZDeflate(c, nu) for c in coords), nu

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for c in self.coords)

    @cached_property
    def exact_polys(self):
        """Sympy ``Poly`` per coordinate (polynomial curves only)."""
        import sympy as sp

        if not self.is_polynomial():
            raise TypeError("exact polynomials exist only for polynomial curves")
        z = sp.Symbol("z")
        return tuple(_sympy_poly(c, z) for c in self.coords)

    def check_domain(self, z) -> None:
        if np.any(np.abs(np.asarray(z)) >= self.R0):
            raise OutsideDomain(f"point(s) outside B({self.R0})")

    def values(self, z) -> np.ndarray:
        """Coordinate values, shape ``(n+1,) + shape(z)``."""
        z = np.asarray(z, dtype=config.complex_dtype())
        return np.stack([c.evaluate(z) for c in self.coords])

    def jets(self, z0, K: int) -> np.ndarray:
        """Coordinate jets, shape ``(n+1, K+1) + shape(z0)``."""
        z0 = np.asarray(z0, dtype=config.complex_dtype())
        return np.stack([c.jet(z0, K) for c in self.coords])

    def log_norm(self, z) -> np.ndarray:
        """``log ||f(z)||`` with the Euclidean norm, overflow-safe."""
        v = np.abs(self.values(z))
        top = v.max(axis=0)
        if np.any(top == 0):
            raise AllCoordinatesVanish("f(z) = 0: the representation is not reduced there")
        return np.log(top) + 0.5 * np.log(np.sum((v / top) ** 2, axis=0))

    # -- serialization ---------------------------------------------------
    @classmethod
    def from_strings(cls, coords: Iterable[str], R0: Optional[float] = math.inf) -> "HoloCurve":
        return cls(tuple(parse_expr(s) for s in coords), R0)

    @classmethod
    def from_json(cls, text: str) -> "HoloCurve":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        if not isinstance(data, dict) or "coords" not in data:
            raise ParseError("curve JSON needs a 'coords' list")
        coords = []
        for idx, s in enumerate(data["coords"]):
            try:
                coords.append(parse_expr(str(s)))
            except ParseError as exc:
                raise ParseError(f"coords[{idx}]: {exc.message}", exc.line, exc.column) from None
        R0 = data.get("R0", None)
        if isinstance(R0, str):
            R0 = math.inf if R0.lower() in ("inf", "infinity") else float(R0)
        curve = cls(tuple(coords), math.inf if R0 is None else R0)
        if "n" in data and int(data["n"]) != curve.n:
            raise DimensionMismatch(f"declared n={data['n']} but {len(coords)} coordinates given")
        return curve

    def to_json(self) -> str:
        R0 = "inf" if math.isinf(self.R0) else self.R0
        return json.dumps({"n": self.n, "R0": R0, "coords": [str(c) for c in self.coords]})


def curve_jet_at(f: HoloCurve, z0: complex, K: int) -> List[JetSeries]:
    """Degree-``K`` Taylor expansions of every coordinate at ``z0``."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    f.check_domain(z0)
    J = f.jets(np.asarray(z0, dtype=config.complex_dtype()), K)
    return [JetSeries(z0, J[i]) for i in range(f.n + 1)]


def curve_norm_log(f: HoloCurve, z: complex) -> float:
    f.check_domain(z)
    return float(f.log_norm(np.asarray(z))[()])
