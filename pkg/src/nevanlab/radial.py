"""Circle quadrature and the radial Nevanlinna functionals.

Every functional here is a mean over a circle ``|z| = r`` (with respect to
``dtheta / 2 pi``) or a logarithmically weighted count of zeros. The results
are :class:`RadialProfile` values sampled on an increasing grid of radii.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import config
from .curve import Const, CurveExpr, HoloCurve
from .divisor import Hypersurface, pullback
from .errors import (
    BoundaryZero,
    GridExceedsScan,
    NoConvergence,
    OutsideDomain,
    ParameterViolation,
    ParseError,
)
from .jets import SATURATED, vanishing_order

DEFAULT_TOL = 1e-10
START_NODES = 64
NODE_CAP = 2**20
BOUNDARY_GAP = 1e-8
MERGE_RADIUS = 1e-8
MAX_SCAN_RADIUS = 50.0
MAX_ZEROS = 10_000

LABELS = ("T", "N", "m", "S", "margin", "residual")


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def circle_integral(
    g: Callable[[np.ndarray], np.ndarray],
    r: float,
    tol: float = DEFAULT_TOL,
    *,
    of: str = "z",
    start: int = START_NODES,
    cap: int = NODE_CAP,
) -> float:
    """Mean of ``g`` over the circle of radius ``r``.

    ``g`` receives the nodes ``z = r e^{i theta}`` (``of="z"``) or the
    angles ``theta`` (``of="theta"``) as an array. The periodic trapezoid
    rule is refined by doubling the node count until two successive
    estimates agree to ``tol * max(1, |I|)``. A node where ``g`` is not
    finite (a logarithmic singularity) is replaced by the point half a step
    further along the circle.
    """
    if of not in ("z", "theta"):
        raise ValueError("of must be 'z' or 'theta'")
    rdt = config.real_dtype()
    pi2 = 2 * np.pi

    def sample(theta: np.ndarray, step: float) -> np.ndarray:
        def call(th):
            arg = th if of == "theta" else (rdt(r) * np.exp(1j * th.astype(rdt))).astype(config.complex_dtype())
            with np.errstate(all="ignore"):
                return np.real(np.asarray(g(arg))).astype(rdt, copy=False) * np.ones(th.shape, dtype=rdt)

        vals = call(theta)
        bad = ~np.isfinite(vals)
        if np.any(bad):
            vals = vals.copy()
            vals[bad] = call(theta[bad] + step / 2)
            if not np.all(np.isfinite(vals)):
                raise NoConvergence("integrand is not finite near a quadrature node")
        return vals

    N = start
    theta = pi2 * np.arange(N, dtype=rdt) / N
    total = sample(theta, pi2 / N).sum()
    estimate = total / N
    while N < cap:
        step = pi2 / (2 * N)
        mids = theta + step
        total = total + sample(mids, step).sum()
        theta = np.empty(2 * N, dtype=rdt)
        theta[0::2] = pi2 * np.arange(N, dtype=rdt) / N
        theta[1::2] = mids
        N *= 2
        new = total / N
        if abs(new - estimate) < tol * max(1.0, abs(new)):
            return float(new)
        estimate = new
    raise NoConvergence(f"trapezoid did not settle within {cap} nodes at r={r}")


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A real function of the radius sampled on an increasing grid."""

    r_grid: np.ndarray
    values: np.ndarray
    label: str
    meta: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        r = np.array(self.r_grid, dtype=float)
        v = np.array(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size == 0:
            raise ValueError("r_grid and values must be equal-length nonempty 1-D arrays")
        if np.any(np.diff(r) <= 0):
            raise ValueError("r_grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        r.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "r_grid", r)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self) -> int:
        return self.r_grid.size

    def at(self, r: float) -> float:
        """Linear interpolation inside the grid."""
        if r < self.r_grid[0] or r > self.r_grid[-1]:
            from .errors import RadiusOutsideProfile

            raise RadiusOutsideProfile(f"r={r} outside [{self.r_grid[0]}, {self.r_grid[-1]}]")
        return float(np.interp(r, self.r_grid, self.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "value", "label"])
        for r, v in zip(self.r_grid, self.values):
            w.writerow([repr(float(r)), repr(float(v)), self.label])
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {"label": self.label, "r": [float(r) for r in self.r_grid], "value": [float(v) for v in self.values]}
        if self.meta:
            out["meta"] = {k: float(v) for k, v in sorted(self.meta.items())}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_csv(cls, text: str) -> "RadialProfile":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["r", "value", "label"]:
            raise ParseError("profile CSV must start with the header r,value,label")
        rs, vs, labels = [], [], set()
        for i, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError("expected three columns", i, 1)
            rs.append(float(row[0]))
            vs.append(float(row[1]))
            labels.add(row[2])
        if len(labels) != 1:
            raise ParseError("a profile carries exactly one label")
        return cls(np.array(rs), np.array(vs), labels.pop())

    @classmethod
    def from_json(cls, text: str) -> "RadialProfile":
        data = json.loads(text)
        return cls(np.array(data["r"]), np.array(data["value"]), data["label"], data.get("meta", {}))


@dataclass(frozen=True)
class ZeroRecord:
    location: complex
    order: int


@dataclass(frozen=True)
class ZeroSet:
    """Zeros of a pullback in the closed disk of radius ``r_max``.

    ``records`` includes the origin when it is a zero; its order is
    repeated in ``origin_order``.
    """

    records: Tuple[ZeroRecord, ...]
    r_max: float
    origin_order: int = 0

    def __post_init__(self):
        recs = tuple(sorted(self.records, key=lambda z: (abs(z.location), np.angle(z.location))))
        for rec in recs:
            if rec.order < 1:
                raise ValueError("zero orders must be positive")
            if abs(rec.location) > self.r_max:
                raise ValueError("zero outside the scanned disk")
        object.__setattr__(self, "records", recs)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def total_order(self) -> int:
        return sum(z.order for z in self.records)

    def nonzero(self) -> List[ZeroRecord]:
        return [z for z in self.records if z.location != 0]


# ---------------------------------------------------------------------------
# characteristic function
# ---------------------------------------------------------------------------


def _grid(r_grid) -> np.ndarray:
    r = np.atleast_1d(np.asarray(r_grid, dtype=float))
    if np.any(r <= 0):
        raise ParameterViolation("radii must be positive")
    return r


def mean_log_norm(f: HoloCurve, r: float, tol: float = DEFAULT_TOL) -> float:
    return circle_integral(f.log_norm, r, tol)


def characteristic_T(f: HoloCurve, d_twist: int, r_grid, tol: float = DEFAULT_TOL) -> RadialProfile:
    """``T_{f,O(d)}(r) = d * (mean of log||f|| on |z|=r  -  log||f(0)||)``."""
    r = _grid(r_grid)
    f.check_domain(r.max())
    base = float(f.log_norm(np.zeros((), dtype=config.complex_dtype())))
    vals = np.array([d_twist * (mean_log_norm(f, ri, tol) - base) for ri in r])
    return RadialProfile(r, vals, "T")


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------


def _exact_pullback_poly(f: HoloCurve, Q: Hypersurface):
    import sympy as sp

    z = sp.Symbol("z")
    poly = sp.Poly(sp.expand(pullback(f, Q).to_sympy(z)), z)
    return poly if poly.get_domain().is_Exact else None


def _complex_coeffs(poly) -> np.ndarray:
    import sympy as sp

    return np.array([complex(sp.N(c, 30)) for c in poly.all_coeffs()], dtype=complex)


def _polish(coeffs: np.ndarray, root: complex, steps: int = 3) -> complex:
    d = np.polyder(coeffs)
    for _ in range(steps):
        dv = np.polyval(d, root)
        if dv == 0:
            break
        step = np.polyval(coeffs, root) / dv
        root = root - step
    return complex(root)


def _zeros_polynomial(poly, r_max: float) -> ZeroSet:
    import sympy as sp

    z = poly.gens[0]
    coeffs_low = list(reversed(poly.all_coeffs()))
    nu0 = 0
    while coeffs_low[nu0] == 0:
        nu0 += 1
    rest = sp.Poly(sp.quo(poly.as_expr(), z**nu0), z) if nu0 else poly
    records = [ZeroRecord(0j, nu0)] if nu0 else []
    if rest.degree() > 0:
        _, factors = sp.sqf_list(rest)
        for fac, mult in factors:
            c = _complex_coeffs(fac)
            for root in np.roots(c):
                root = _polish(c, complex(root))
                if abs(abs(root) - r_max) < BOUNDARY_GAP:
                    raise BoundaryZero(f"zero at |z|={abs(root)!r} lies on the scan boundary r_max={r_max}")
                if abs(root) < r_max:
                    records.append(ZeroRecord(root, int(mult)))
    return ZeroSet(tuple(records), r_max, nu0)


class _ArgumentPrinciple:
    """Zero location for a holomorphic ``psi`` inside an axis-parallel square."""

    EDGE_START = 32
    EDGE_CAP = 2**16
    MAX_STEP = np.pi / 4
    SPLITS = (0.5123, 0.4711, 0.5379, 0.4487, 0.5602)
    MIN_WIDTH = 1e-6

    def __init__(self, psi: CurveExpr):
        self.psi = psi

    def values(self, z: np.ndarray) -> np.ndarray:
        return self.psi.evaluate(z.astype(config.complex_dtype()))

    def edge(self, a: complex, b: complex) -> Optional[float]:
        """Total change of ``arg psi`` along the segment ``a -> b`` (``None`` if psi vanishes on it)."""
        M = self.EDGE_START
        while True:
            t = np.linspace(0.0, 1.0, M + 1)
            v = self.values(a + (b - a) * t)
            if np.any(v == 0) or not np.all(np.isfinite(v)):
                return None
            steps = np.angle(v[1:] / v[:-1])
            if np.max(np.abs(steps)) <= self.MAX_STEP:
                return float(steps.sum())
            if M >= self.EDGE_CAP:
                return None
            M *= 2

    def winding(self, x0: float, x1: float, y0: float, y1: float) -> Optional[int]:
        corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        total = 0.0
        for a, b in zip(corners, corners[1:] + corners[:1]):
            e = self.edge(a, b)
            if e is None:
                return None
            total += e
        w = total / (2 * np.pi)
        k = int(round(w))
        if abs(w - k) > 0.25:
            return None
        return k

    def newton(self, z: complex, mult: int, box, iters: int = 60) -> Optional[complex]:
        x0, x1, y0, y1 = box
        pad = 2 * max(x1 - x0, y1 - y0)
        for _ in range(iters):
            J = self.psi.jet(np.asarray(z, dtype=config.complex_dtype()), 1)
            if J[1] == 0:
                return None
            step = mult * complex(J[0] / J[1])
            z = z - step
            if not (x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad):
                return None
            if abs(step) <= 1e-15 * max(1.0, abs(z)):
                break
        if not (x0 <= z.real <= x1 and y0 <= z.imag <= y1):
            return None
        return z

    def scan(self, half: float) -> List[ZeroRecord]:
        found: List[ZeroRecord] = []
        w = self._winding_with_retry(-half, half, -half, half)
        if w is None:
            raise NoConvergence("argument principle failed on the outer square")
        stack = [(-half, half, -half, half, w)]
        while stack:
            x0, x1, y0, y1, w = stack.pop()
            if w == 0:
                continue
            width = max(x1 - x0, y1 - y0)
            if w == 1 or width < self.MIN_WIDTH:
                centre = complex((x0 + x1) / 2, (y0 + y1) / 2)
                root = self.newton(centre, w, (x0, x1, y0, y1))
                if root is not None or width < self.MIN_WIDTH:
                    found.append(ZeroRecord(centre if root is None else root, w))
                    if len(found) > MAX_ZEROS:
                        raise NoConvergence(f"more than {MAX_ZEROS} zeros in the scanned disk")
                    continue
            children = self._split(x0, x1, y0, y1, w)
            stack.extend(children)
        return found

    def _winding_with_retry(self, x0, x1, y0, y1):
        return self.winding(x0, x1, y0, y1)

    def _split(self, x0, x1, y0, y1, w):
        for s in self.SPLITS:
            xm = x0 + s * (x1 - x0)
            ym = y0 + (1 - s) * (y1 - y0)
            quads = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
            ws = [self.winding(*q) for q in quads]
            if any(v is None or v < 0 for v in ws) or sum(ws) != w:
                continue
            return [q + (v,) for q, v in zip(quads, ws)]
        raise NoConvergence(f"could not split [{x0},{x1}]x[{y0},{y1}] consistently")


def _merge(records: List[ZeroRecord]) -> List[ZeroRecord]:
    merged: List[ZeroRecord] = []
    for rec in sorted(records, key=lambda z: (z.location.real, z.location.imag)):
        for i, other in enumerate(merged):
            if abs(other.location - rec.location) < MERGE_RADIUS:
                merged[i] = ZeroRecord(other.location, other.order + rec.order)
                break
        else:
            merged.append(rec)
    return merged


def _zeros_transcendental(psi: CurveExpr, r_max: float) -> ZeroSet:
    origin = np.zeros((), dtype=config.complex_dtype())
    nu0 = vanishing_order(psi.jet(origin, 64))
    nu0 = 0 if nu0 is SATURATED else nu0
    ap = _ArgumentPrinciple(psi)
    half = r_max * (1 + 1e-3) + 1e-3
    records = []
    for rec in _merge(ap.scan(half)):
        loc = rec.location
        if nu0 and abs(loc) < MERGE_RADIUS:
            loc = 0j
        if abs(abs(loc) - r_max) < BOUNDARY_GAP:
            raise BoundaryZero(f"zero at |z|={abs(loc)!r} lies on the scan boundary r_max={r_max}")
        if abs(loc) < r_max:
            records.append(ZeroRecord(loc, rec.order))
    got0 = sum(r.order for r in records if r.location == 0)
    if got0 != nu0:
        raise NoConvergence(f"origin order {nu0} from the jet but {got0} from the argument principle")
    return ZeroSet(tuple(records), r_max, nu0)


def zero_set(f: HoloCurve, Q: Hypersurface, r_max: float) -> ZeroSet:
    """All zeros of ``Q(f)`` in the disk of radius ``r_max`` with multiplicities."""
    if not 0 < r_max <= MAX_SCAN_RADIUS:
        raise ParameterViolation(f"r_max must lie in (0, {MAX_SCAN_RADIUS}]")
    if r_max >= f.R0:
        raise OutsideDomain(f"r_max={r_max} is not inside B({f.R0})")
    psi = pullback(f, Q)
    if isinstance(psi, Const):
        return ZeroSet((), r_max, 0)
    if f.is_polynomial():
        poly = _exact_pullback_poly(f, Q)
        if poly is not None:
            if poly.degree() > MAX_ZEROS:
                raise ParameterViolation("pullback degree exceeds the zero cap")
            return _zeros_polynomial(poly, r_max)
    return _zeros_transcendental(psi, r_max)


def winding_on_circle(psi: CurveExpr, r: float) -> int:
    """Winding number of ``psi`` around 0 along ``|z| = r``."""
    M = 256
    while M <= 2**20:
        th = 2 * np.pi * np.arange(M + 1) / M
        v = psi.evaluate((r * np.exp(1j * th)).astype(config.complex_dtype()))
        if np.any(v == 0):
            raise BoundaryZero(f"pullback vanishes on |z|={r}")
        steps = np.angle(v[1:] / v[:-1])
        if np.max(np.abs(steps)) <= np.pi / 4:
            return int(round(steps.sum() / (2 * np.pi)))
        M *= 2
    raise NoConvergence("winding number did not resolve")


# ---------------------------------------------------------------------------
# counting and proximity
# ---------------------------------------------------------------------------


def counting_N(zs: ZeroSet, r_grid, trunc: Optional[int] = None) -> RadialProfile:
    """``min(nu_0,k) log r + sum_{0<|a|<=r} min(nu_a,k) log(r/|a|)``."""
    r = _grid(r_grid)
    if trunc is not None and trunc < 1:
        raise ParameterViolation("truncation level must be a positive integer")
    if r.max() > zs.r_max:
        raise GridExceedsScan(f"grid reaches {r.max()} but zeros were scanned only to {zs.r_max}")
    if r.min() < 1:
        raise ParameterViolation("the counting convention needs radii >= 1")
    cap = (lambda v: v) if trunc is None else (lambda v: min(v, trunc))
    others = zs.nonzero()
    mods = np.array([abs(z.location) for z in others], dtype=float)
    mults = np.array([cap(z.order) for z in others], dtype=float)
    vals = []
    for ri in r:
        inside = mods <= ri
        vals.append(cap(zs.origin_order) * math.log(ri) + float(np.sum(mults[inside] * np.log(ri / mods[inside]))))
    label = "N" if trunc is None else f"N_trunc({trunc})"
    return RadialProfile(r, np.array(vals), label)


def _log_abs(expr: CurveExpr, z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(expr.evaluate(z)))


def proximity_m(f: HoloCurve, Q: Hypersurface, r_grid, tol: float = DEFAULT_TOL) -> RadialProfile:
    """Mean over ``|z| = r`` of ``log(||f||^d * coeff_norm / |Q(f)|)``."""
    r = _grid(r_grid)
    f.check_domain(r.max())
    psi = pullback(f, Q)
    d, cn = Q.d, math.log(Q.coeff_norm)

    def integrand(z):
        return d * f.log_norm(z) + cn - _log_abs(psi, z)

    vals = np.array([circle_integral(integrand, ri, tol) for ri in r])
    return RadialProfile(r, vals, "m")


def fmt_residual(f: HoloCurve, Q: Hypersurface, r_grid, tol: float = DEFAULT_TOL) -> RadialProfile:
    """``d T(r) - m(r) - N(r)`` shifted so that it vanishes at the first radius.

    The shift is stored in ``meta["offset"]``.
    """
    r = _grid(r_grid)
    T = characteristic_T(f, Q.d, r, tol)
    m = proximity_m(f, Q, r, tol)
    zs = _zero_set_covering(f, Q, r.max())
    N = counting_N(zs, r)
    raw = T.values - m.values - N.values
    offset = -raw[0]
    return RadialProfile(r, raw + offset, "residual", {"offset": float(offset)})


def _zero_set_covering(f: HoloCurve, Q: Hypersurface, r: float) -> ZeroSet:
    """``zero_set`` on a disk just containing ``r``, nudging away from boundary zeros."""
    for bump in (0.0, 1e-6, 3e-6, 1e-5):
        try:
            return zero_set(f, Q, min(MAX_SCAN_RADIUS, r * (1 + bump)) if bump else r)
        except BoundaryZero:
            continue
    raise BoundaryZero(f"zeros cluster at |z| = {r}")


# ---------------------------------------------------------------------------
# logarithmic-derivative and main-lemma integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs_core: float
    ratio: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs_core": self.rhs_core, "ratio": self.ratio}


def _check_radii(r: float, R: float, R0: float = math.inf) -> None:
    if not 0 < r < R < R0:
        raise ParameterViolation(f"need 0 < r < R < R0, got r={r}, R={R}, R0={R0}")


def logderiv_bound_check(phi: CurveExpr, l: int, t: float, p: float, r: float, R: float,
                         tol: float = 1e-8) -> BoundCheck:
    """Mean of ``|phi^(l) / phi|^t`` on ``|z| = r`` against ``(R/(r(R-r)) T_phi(R))^p``.

    ``T_phi`` is the characteristic of the curve ``(1, phi)`` into ``P^1``.
    """
    if l < 1:
        raise ParameterViolation("l must be a positive integer")
    if not (0 < t * l < p < 1):
        raise ParameterViolation(f"need 0 < t*l < p < 1, got t*l={t * l}, p={p}")
    _check_radii(r, R)
    fact = math.factorial(l)

    def integrand(z):
        J = phi.jet(z, l)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(fact * J[l] / J[0]) ** t

    lhs = circle_integral(integrand, r, tol)
    T = characteristic_T(HoloCurve((Const(1), phi)), 1, [R], tol).values[0]
    rhs = (R / (r * (R - r)) * T) ** p
    return BoundCheck(float(lhs), float(rhs), float(lhs / rhs) if rhs > 0 else math.inf)


def main_lemma_check(P, f: HoloCurve, t: float, p: float, r: float, R: float,
                     twisted: bool = False, tol: float = 1e-8) -> BoundCheck:
    """Mean of ``|P(j_k f)|^t`` (or its metric norm) against ``(R/(r(R-r)) T_{f,O(1)}(R))^p``."""
    from .jetdiff import metric_norm_log

    if not (0 < t * P.m < p < 1):
        raise ParameterViolation(f"need 0 < t*m < p < 1, got t*m={t * P.m}, p={p}")
    _check_radii(r, R, f.R0)

    if twisted:
        def integrand(z):
            return np.exp(t * metric_norm_log(P, f, z))
    else:
        def integrand(z):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.abs(P.evaluate(f, z)) ** t

    lhs = circle_integral(integrand, r, tol)
    T = characteristic_T(f, 1, [R], tol).values[0]
    rhs = (R / (r * (R - r)) * T) ** p
    return BoundCheck(float(lhs), float(rhs), float(lhs / rhs) if rhs > 0 else math.inf)
