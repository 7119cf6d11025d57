"""Second-Main-Theorem margins and defect estimates on radial grids.

Every inequality is checked up to one additive constant, calibrated at the
first grid radius and reported alongside the result. Limits inferior are
estimated by the minimum over the top 20% of the radius range.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence, Union

import numpy as np

from . import config
from .curve import HoloCurve
from .divisor import Arrangement, Hypersurface, general_position, pullback
from .errors import (
    BoundedCharacteristic,
    DegenerateInput,
    MultiplicityHypothesisFailed,
    ParameterViolation,
    RadiusOutsideProfile,
)
from .jetdiff import GGJetDifferential, wronskian_from_jets
from .radial import RadialProfile, _grid, _zero_set_covering, characteristic_T, counting_N

TAIL_FRACTION = 0.2
DEFAULT_EPS = 0.5


def _log_plus(x: float) -> float:
    return math.log(x) if x > 1 else 0.0


@dataclass(frozen=True)
class FiniteCase:
    """Error-term data for a disk of finite radius ``R0``."""

    R0: float
    K: float = 1.0


INFINITE = "infinite"


def error_term_S(T: Union[RadialProfile, float], m: int, eps: float = DEFAULT_EPS,
                 case: Union[str, FiniteCase] = INFINITE, r: Optional[float] = None) -> float:
    """The error term of the second main theorem with its ``O(1)`` set to zero.

    ``T`` is a characteristic profile (read at ``r`` by interpolation) or a
    plain value. For an infinite radius the term is
    ``m((1+eps) log+ T + (1+eps)^2 log+ log+ T)``; for ``FiniteCase(R0, K)``
    it is ``K(log(1/(R0-r)) + log+ T)``.
    """
    if eps <= 0:
        raise ParameterViolation("eps must be positive")
    if isinstance(T, RadialProfile):
        if r is None:
            raise ParameterViolation("a radius is needed to read the profile")
        t = T.at(r)
    else:
        t = float(T)
    if case == INFINITE:
        lp = _log_plus(t)
        return m * ((1 + eps) * lp + (1 + eps) ** 2 * _log_plus(lp))
    if isinstance(case, FiniteCase):
        if r is None or not 0 <= r < case.R0:
            raise RadiusOutsideProfile(f"finite-radius error term needs 0 <= r < R0={case.R0}")
        return case.K * (math.log(1.0 / (case.R0 - r)) + _log_plus(t))
    raise ParameterViolation(f"unknown error case {case!r}")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _tail_mask(r: np.ndarray) -> np.ndarray:
    cut = r[0] + (1 - TAIL_FRACTION) * (r[-1] - r[0])
    mask = r >= cut
    mask[-1] = True
    return mask


def _violating_measure(r: np.ndarray, margin: np.ndarray) -> float:
    neg = (margin < 0).astype(float)
    return float(np.sum(np.diff(r) * (neg[1:] + neg[:-1]) / 2))


@dataclass(frozen=True)
class SMTReport:
    margin: RadialProfile
    violating_measure: float
    tail_clean: bool
    error_case: str
    offset: float
    lhs: RadialProfile
    counting: RadialProfile
    S: RadialProfile

    def to_dict(self) -> dict:
        return {
            "error_case": self.error_case,
            "offset": self.offset,
            "tail_clean": self.tail_clean,
            "violating_measure": self.violating_measure,
            "r": [float(x) for x in self.margin.r_grid],
            "margin": [float(x) for x in self.margin.values],
            "lhs": [float(x) for x in self.lhs.values],
            "counting": [float(x) for x in self.counting.values],
            "S": [float(x) for x in self.S.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def table(self) -> dict:
        return {"r": self.margin.r_grid, "lhs": self.lhs.values, "counting": self.counting.values,
                "S": self.S.values, "margin": self.margin.values}


@dataclass(frozen=True)
class CartanWronskian:
    """Hyperplanes in general position, with the Wronskian as jet differential (``k = n``)."""

    arrangement: Arrangement


@dataclass(frozen=True)
class GeneralJetDiff:
    """A jet differential ``P`` of weighted degree ``m`` with values twisted by ``A^{-mtilde}``.

    ``D`` is the boundary divisor (its components); ``m`` and ``mtilde``
    are supplied by the caller, who is responsible for the hypotheses
    that make the inequality apply.
    """

    P: GGJetDifferential
    D: Union[Hypersurface, Arrangement]
    m: int
    mtilde: int


def _sample_points(f: HoloCurve, count: int = 5, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rad = 0.9 if math.isinf(f.R0) else 0.45 * f.R0
    pts = rad * np.sqrt(rng.uniform(0.05, 1, count)) * np.exp(2j * np.pi * rng.uniform(0, 1, count))
    return pts.astype(config.complex_dtype())


def _is_constant(f: HoloCurve) -> bool:
    if f.is_polynomial():
        polys = f.exact_polys
        return all((polys[0] * p.diff() - p * polys[0].diff()).is_zero for p in polys[1:]) and all(
            (polys[i] * polys[j].diff() - polys[j] * polys[i].diff()).is_zero
            for i in range(len(polys)) for j in range(i + 1, len(polys))
        )
    J = f.jets(_sample_points(f), 1)
    for i in range(f.n + 1):
        for j in range(i + 1, f.n + 1):
            w = J[i, 0] * J[j, 1] - J[j, 0] * J[i, 1]
            scale = np.abs(J[i, 0] * J[j, 1]) + np.abs(J[j, 0] * J[i, 1])
            if np.any(np.abs(w) > 1e-9 * np.maximum(scale, 1e-300)):
                return False
    return True


def _wronskian_identically_zero(f: HoloCurve) -> bool:
    if f.is_polynomial():
        import sympy as sp

        z = sp.Symbol("z")
        polys = f.exact_polys
        M = sp.Matrix(f.n + 1, f.n + 1, lambda i, j: sp.diff(polys[j].as_expr(), z, i))
        return sp.expand(M.det()) == 0
    J = f.jets(_sample_points(f), f.n)
    W = wronskian_from_jets(J)
    scale = np.prod(np.abs(J[:, : f.n + 1]).max(axis=1), axis=0) * math.prod(math.factorial(i) for i in range(f.n + 1))
    return bool(np.all(np.abs(W) <= 1e-9 * scale))


def _differential_identically_zero(P: GGJetDifferential, f: HoloCurve) -> bool:
    vals = P.evaluate(f, _sample_points(f))
    return bool(np.all(vals == 0) or np.all(np.abs(vals) < 1e-12 * max(1.0, float(np.abs(vals).max()))))


def _components(D) -> Sequence[Hypersurface]:
    return list(D) if isinstance(D, Arrangement) else [D]


def _assemble(r, lhs, counting, S, case) -> SMTReport:
    raw = counting.values + S - lhs.values
    offset = max(0.0, -float(raw[0]))
    margin = RadialProfile(r, raw + offset, "margin", {"offset": offset})
    tail = _tail_mask(margin.r_grid)
    return SMTReport(
        margin=margin,
        violating_measure=_violating_measure(margin.r_grid, margin.values),
        tail_clean=bool(np.all(margin.values[tail] >= 0)),
        error_case=case,
        offset=offset,
        lhs=lhs,
        counting=counting,
        S=RadialProfile(r, S, "S"),
    )


def smt_margin(f: HoloCurve, spec: Union[CartanWronskian, GeneralJetDiff], r_grid,
               eps: float = DEFAULT_EPS, K: float = 1.0) -> SMTReport:
    """``RHS - LHS`` of the second main theorem along ``r_grid``.

    Cartan case: ``sum_j N^(n)(r, H_j) + S(r) - (q-n-1) T(r)`` with
    ``S`` using the Wronskian's weighted degree ``n(n+1)/2``. General case:
    ``m N^(1)(r, D) + S(r) - mtilde T(r)``. The offset lifts the first radius
    to a nonnegative margin when it starts negative.
    """
    r = _grid(r_grid)
    f.check_domain(r.max())
    if _is_constant(f):
        raise DegenerateInput("f is constant (the theorem needs a non-constant curve)")
    case = "infinite_radius" if math.isinf(f.R0) else "finite_radius"
    err_case = INFINITE if math.isinf(f.R0) else FiniteCase(f.R0, K)
    T = characteristic_T(f, 1, r)
    zero_cap = r.max()

    if isinstance(spec, CartanWronskian):
        arr = spec.arrangement
        if arr.n != f.n:
            raise ParameterViolation("arrangement and curve live in different P^n")
        if not general_position(arr):
            raise DegenerateInput("hyperplanes are not in general position")
        if _wronskian_identically_zero(f):
            raise DegenerateInput("the Wronskian of f vanishes identically (f is linearly degenerate)")
        n, q = f.n, len(arr)
        weight = n * (n + 1) // 2
        counts = np.zeros_like(r)
        for H in arr:
            zs = _zero_set_covering(f, H, zero_cap)
            counts = counts + counting_N(zs, r, trunc=n).values
        counting = RadialProfile(r, counts, f"N_trunc({n})")
        lhs = RadialProfile(r, (q - n - 1) * T.values, "T")
    elif isinstance(spec, GeneralJetDiff):
        if spec.P.m != spec.m:
            raise ParameterViolation(f"declared m={spec.m} but the differential has weighted degree {spec.P.m}")
        if spec.mtilde <= 0 or spec.m <= 0:
            raise ParameterViolation("m and mtilde must be positive")
        if _differential_identically_zero(spec.P, f):
            raise DegenerateInput("P(j_k f) vanishes identically")
        weight = spec.m
        comps = _components(spec.D)
        prod = reduce(lambda a, b: a * b, comps)
        zs = _zero_set_covering(f, prod, zero_cap)
        counting = RadialProfile(r, spec.m * counting_N(zs, r, trunc=1).values, "N_trunc(1)")
        lhs = RadialProfile(r, spec.mtilde * T.values, "T")
    else:
        raise ParameterViolation(f"unknown second-main-theorem setting {spec!r}")

    S = np.array([error_term_S(T, weight, eps, err_case, ri) for ri in r])
    return _assemble(r, lhs, counting, S, case)


# ---------------------------------------------------------------------------
# defects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DefectEstimate:
    ratio_profile: RadialProfile
    liminf_estimate: float
    mu0: int
    tail_monotone: bool

    def to_dict(self) -> dict:
        return {
            "mu0": self.mu0,
            "liminf_estimate": self.liminf_estimate,
            "tail_monotone": self.tail_monotone,
            "r": [float(x) for x in self.ratio_profile.r_grid],
            "ratio": [float(x) for x in self.ratio_profile.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _defect_parts(f: HoloCurve, Q: Hypersurface, A_twist: int, mu0: int, r_grid):
    if mu0 < 1:
        raise ParameterViolation("mu0 must be a positive integer")
    if A_twist <= 0:
        raise ParameterViolation("A must be ample (positive degree)")
    r = _grid(r_grid)
    T = characteristic_T(f, 1, r)
    if T.values[-1] <= T.values[0] + 1:
        raise BoundedCharacteristic("T does not grow by more than 1 across the grid")
    zs = _zero_set_covering(f, Q, r.max())
    return r, T, zs


def _estimate(r, T, zs, Q, A_twist, mu0) -> DefectEstimate:
    N = counting_N(zs, r, trunc=mu0)
    ratio = (Q.d * T.values - N.values) / (A_twist * T.values)
    prof = RadialProfile(r, ratio, "defect_ratio")
    tail = _tail_mask(r)
    vals = ratio[tail]
    d = np.diff(vals)
    monotone = bool(np.all(d >= -1e-12) or np.all(d <= 1e-12))
    return DefectEstimate(prof, float(vals.min()), mu0, monotone)


def defect_estimate(f: HoloCurve, Q: Hypersurface, A_twist: int, mu0: int, r_grid) -> DefectEstimate:
    """``(T_{f,D} - N^(mu0)(r, D)) / T_{f,A}`` with its tail minimum as the liminf estimate."""
    r, T, zs = _defect_parts(f, Q, A_twist, mu0, r_grid)
    return _estimate(r, T, zs, Q, A_twist, mu0)


INFINITY = math.inf


def defect_lower_bound(mu0: int, mu, gamma) -> Fraction:
    """``(1 - mu0/mu) / gamma``; ``mu = INFINITY`` gives ``1 / gamma``."""
    if mu0 < 1:
        raise ParameterViolation("mu0 must be a positive integer")
    gamma = Fraction(gamma) if not isinstance(gamma, float) else Fraction(gamma).limit_denominator()
    if gamma <= 0:
        raise ParameterViolation("gamma must be positive")
    if mu == INFINITY:
        return 1 / gamma
    if int(mu) != mu or mu < mu0:
        raise ParameterViolation("need mu >= mu0")
    return (1 - Fraction(mu0, int(mu))) / gamma


@dataclass(frozen=True)
class Fujimoto:
    n: int
    rho: float = 0

    def bound(self):
        return self.n + 1 + self.rho * self.n * (self.n + 1)


@dataclass(frozen=True)
class GammaBound:
    gamma_AL: float
    rho: float
    m: int

    def bound(self):
        return self.gamma_AL + 2 * self.rho * self.m


@dataclass(frozen=True)
class Brotbek:
    d: int
    c: int
    rho: float = 0

    def bound(self):
        return self.d - (self.c - 2 * self.rho)


@dataclass(frozen=True)
class XieBound:
    gamma: float
    m: int
    mtilde: int

    def bound(self):
        return self.gamma - Fraction(self.mtilde, self.m)


def defect_relation_margin(defects: Sequence[float], bound_spec) -> float:
    """``bound - sum(defects)`` for the chosen defect relation."""
    if any(d < 0 for d in defects):
        raise ParameterViolation("defects must be nonnegative")
    rho = getattr(bound_spec, "rho", 0)
    if rho < 0:
        raise ParameterViolation("rho must be nonnegative")
    if isinstance(bound_spec, Fujimoto) and bound_spec.n < 1:
        raise ParameterViolation("n must be positive")
    if isinstance(bound_spec, (GammaBound, XieBound)) and bound_spec.m <= 0:
        raise ParameterViolation("m must be positive")
    if isinstance(bound_spec, Brotbek) and (bound_spec.d < 1 or bound_spec.c < 1):
        raise ParameterViolation("d and c must be positive")
    if not isinstance(bound_spec, (Fujimoto, GammaBound, Brotbek, XieBound)):
        raise ParameterViolation(f"unknown bound {bound_spec!r}")
    return float(bound_spec.bound()) - float(sum(defects))


CONSISTENCY_SLACK = 0.05


def defect_consistency(f: HoloCurve, Q: Hypersurface, mu0: int, mu_claimed, gamma, r_grid,
                       A_twist: int = 1) -> bool:
    """Whether ``(1 - mu0/mu)/gamma <= liminf estimate + 0.05``.

    Raises when some zero inside the scan has order below ``mu_claimed``.
    """
    r, T, zs = _defect_parts(f, Q, A_twist, mu0, r_grid)
    if mu_claimed != INFINITY:
        low = [z for z in zs.records if z.order < mu_claimed]
        if low:
            raise MultiplicityHypothesisFailed(
                f"zero at {low[0].location} has order {low[0].order} < {mu_claimed}"
            )
    elif zs.records:
        raise MultiplicityHypothesisFailed("mu = infinity requires the divisor to be omitted")
    est = _estimate(r, T, zs, Q, A_twist, mu0)
    return float(defect_lower_bound(mu0, mu_claimed, gamma)) <= est.liminf_estimate + CONSISTENCY_SLACK
