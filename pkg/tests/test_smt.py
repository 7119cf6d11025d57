import json
import math
from fractions import Fraction

import numpy as np
import pytest

from nevanlab.curve import HoloCurve
from nevanlab.divisor import Arrangement, Hypersurface
from nevanlab.errors import (
    BoundedCharacteristic,
    DegenerateInput,
    MultiplicityHypothesisFailed,
    ParameterViolation,
    RadiusOutsideProfile,
)
from nevanlab.jetdiff import GGJetDifferential, JetTerm
from nevanlab.radial import RadialProfile
from nevanlab.smt import (
    INFINITY,
    Brotbek,
    CartanWronskian,
    FiniteCase,
    Fujimoto,
    GammaBound,
    GeneralJetDiff,
    XieBound,
    defect_consistency,
    defect_estimate,
    defect_lower_bound,
    defect_relation_margin,
    error_term_S,
    smt_margin,
)

H = Hypersurface.hyperplane


def curve(*coords):
    return HoloCurve.from_strings(list(coords))


def points_P1(*pts):
    """Hyperplanes of P^1 vanishing at the given points; ``None`` is infinity."""
    return Arrangement(tuple(H([1, 0]) if p is None else H([-p, 1]) for p in pts))


# -- error term ---------------------------------------------------------------


def test_error_term_examples():
    assert error_term_S(math.e, 1, 0.5) == pytest.approx(1.5, abs=1e-12)
    assert error_term_S(1.0, 3, 0.5) == 0.0
    assert error_term_S(0.2, 3, 0.5) == 0.0
    r = 1 - math.exp(-2)
    assert error_term_S(1.0, 1, 0.5, FiniteCase(1.0, 1.0), r) == pytest.approx(2.0, abs=1e-12)


def test_error_term_profile_and_errors():
    prof = RadialProfile(np.array([1.0, 3.0]), np.array([1.0, math.e]), "T")
    assert error_term_S(prof, 1, 0.5, r=3.0) == pytest.approx(1.5)
    with pytest.raises(RadiusOutsideProfile):
        error_term_S(prof, 1, 0.5, r=5.0)
    with pytest.raises(RadiusOutsideProfile):
        error_term_S(1.0, 1, 0.5, FiniteCase(1.0), 1.0)
    with pytest.raises(ParameterViolation):
        error_term_S(1.0, 1, 0.0)


def test_error_term_monotone_in_T():
    Ts = np.linspace(0.5, 200, 60)
    S = [error_term_S(t, 2, 0.5) for t in Ts]
    assert np.all(np.diff(S) >= 0)


# -- second main theorem margins ----------------------------------------------


def test_smt_line_three_points():
    rep = smt_margin(curve("1", "z"), CartanWronskian(points_P1(0, 1, -2)), np.linspace(2, 30, 30))
    assert rep.tail_clean
    assert rep.error_case == "infinite_radius"
    assert rep.violating_measure == 0.0
    assert len(rep.margin) == 30


def test_smt_exponential_witness():
    r = np.linspace(2, 30, 40)
    rep = smt_margin(curve("1", "exp(z)"), CartanWronskian(points_P1(0, None, -1)), r)
    assert rep.tail_clean
    assert rep.offset >= 0
    # N(r, 0) = N(r, inf) = 0 and N^(1)(r, -1) grows like r / pi
    assert rep.counting.values[-1] / (r[-1] / math.pi) == pytest.approx(1.0, abs=0.1)
    gap = rep.counting.values - rep.lhs.values
    assert np.max(np.abs(gap[r >= 10])) < 1.0


def test_smt_conic_five_lines():
    arr = Arrangement(tuple(H(v) for v in ([1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [1, 2, 5])))
    rep = smt_margin(curve("1", "z", "z^2"), CartanWronskian(arr), np.linspace(2, 30, 25))
    assert rep.tail_clean
    assert rep.violating_measure >= 0


def test_smt_violating_measure_does_not_grow_with_grid():
    arr = points_P1(0, None, -1)
    f = curve("1", "exp(z)")
    measures = [smt_margin(f, CartanWronskian(arr), np.linspace(2, top, int(4 * top))).violating_measure
                for top in (15, 25, 35)]
    assert all(np.isfinite(measures))
    assert measures[0] >= measures[1] - 0.3 and measures[1] >= measures[2] - 0.3


def test_smt_degenerate_inputs():
    arr = points_P1(0, 1, -1)
    with pytest.raises(DegenerateInput):
        smt_margin(curve("1", "2"), CartanWronskian(arr), [2.0, 3.0])
    planes = Arrangement(tuple(H(v) for v in ([1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1])))
    with pytest.raises(DegenerateInput):
        smt_margin(curve("1", "z", "1 + z"), CartanWronskian(planes), [2.0, 3.0])
    bad = Arrangement(tuple(H(v) for v in ([1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1])))
    with pytest.raises(DegenerateInput):
        smt_margin(curve("1", "z", "z^2"), CartanWronskian(bad), [2.0, 3.0])


def test_smt_general_jet_differential():
    P = GGJetDifferential(1, 1, 1, 0, (JetTerm(1, [[1]], [1]),))
    D = points_P1(0, None)
    rep = smt_margin(curve("1", "z"), GeneralJetDiff(P, D, 1, 1), np.linspace(2, 20, 20))
    assert rep.tail_clean
    with pytest.raises(ParameterViolation):
        smt_margin(curve("1", "z"), GeneralJetDiff(P, D, 2, 1), [2.0, 3.0])


def test_smt_report_json():
    rep = smt_margin(curve("1", "z"), CartanWronskian(points_P1(0, 1, -2)), [2.0, 4.0, 8.0])
    data = json.loads(rep.to_json())
    assert data["tail_clean"] is True
    assert len(data["margin"]) == 3 and data["r"] == [2.0, 4.0, 8.0]


# -- defects ------------------------------------------------------------------


def test_defect_omitted_value():
    est = defect_estimate(curve("1", "exp(z)"), H([0, 1]), 1, 1, np.linspace(2, 30, 40))
    assert est.liminf_estimate == pytest.approx(1.0, abs=0.01)
    assert est.ratio_profile.label == "defect_ratio"


def test_defect_line_has_no_defect():
    est = defect_estimate(curve("1", "z"), H([-1, 1]), 1, 1, np.linspace(2, 45, 40))
    assert abs(est.liminf_estimate) < 0.05


def test_defect_truncation_consistency():
    # every zero of (z^3 - 1)^2 has order 2, so N^(2) = 2 N^(1)
    f = curve("1", "(z^3 - 1)^2")
    r = np.linspace(2, 40, 30)
    e1 = defect_estimate(f, H([0, 1]), 1, 1, r)
    e2 = defect_estimate(f, H([0, 1]), 1, 2, r)
    N1 = 1 - e1.ratio_profile.values  # N^(1) / T
    N2 = 1 - e2.ratio_profile.values
    assert np.allclose(N2, 2 * N1, atol=1e-10)


def test_defect_values_within_degree():
    conic = Hypersurface(2, {(2, 0, 0): 1, (0, 1, 1): -1})
    est = defect_estimate(curve("1", "z", "exp(z)"), conic, 1, 1, np.linspace(2, 20, 20))
    assert np.all(est.ratio_profile.values >= -0.05)
    assert np.all(est.ratio_profile.values <= 2 + 0.05)


def test_defect_bounded_characteristic():
    with pytest.raises(BoundedCharacteristic):
        defect_estimate(curve("1", "z"), H([0, 1]), 1, 1, [1.0, 1.5])


def test_defect_lower_bound_examples():
    assert defect_lower_bound(1, INFINITY, Fraction(1, 3)) == 3
    assert defect_lower_bound(2, 2, 1) == 0
    assert defect_lower_bound(2, 4, 1) == Fraction(1, 2)
    with pytest.raises(ParameterViolation):
        defect_lower_bound(3, 2, 1)
    with pytest.raises(ParameterViolation):
        defect_lower_bound(1, 2, 0)


def test_defect_relation_margin_examples():
    assert defect_relation_margin([1, 1], Fujimoto(1, 0)) == 0
    assert defect_relation_margin([], GammaBound(3, 0, 2)) == 3
    assert defect_relation_margin([5 - 3], Brotbek(5, 3, 0)) == 0
    assert defect_relation_margin([0.25], XieBound(2, 4, 2)) == pytest.approx(1.25)
    assert defect_relation_margin([], Fujimoto(2, 0.5)) == pytest.approx(6.0)
    with pytest.raises(ParameterViolation):
        defect_relation_margin([-0.1], Fujimoto(1))
    with pytest.raises(ParameterViolation):
        defect_relation_margin([], Fujimoto(1, -1))


def test_defect_consistency_examples():
    r = np.linspace(2, 30, 30)
    assert defect_consistency(curve("1", "exp(z)"), H([0, 1]), 1, INFINITY, 1, r)
    assert defect_consistency(curve("1", "z^2"), H([0, 1]), 1, 2, 1, r)
    with pytest.raises(MultiplicityHypothesisFailed):
        defect_consistency(curve("1", "z^2 - 1"), H([0, 1]), 1, 2, 1, r)
