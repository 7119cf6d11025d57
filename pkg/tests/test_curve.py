import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nevanlab.curve import (
    Compose,
    Const,
    Exp,
    HoloCurve,
    Var,
    curve_jet_at,
    curve_norm_log,
    parse_expr,
    polynomial_from_coefficients,
)
from nevanlab.errors import AllCoordinatesVanish, DimensionMismatch, NotReduced, OutsideDomain, ParseError
from nevanlab.jets import _series_compose


def test_jet_of_line():
    a = 0.3 - 0.2j
    J = curve_jet_at(HoloCurve.from_strings(["1", "z"]), a, 2)
    assert np.allclose(J[0].coeffs, [1, 0, 0])
    assert np.allclose(J[1].coeffs, [a, 1, 0])


def test_jet_of_exponential():
    J = curve_jet_at(HoloCurve.from_strings(["1", "exp(z)"]), 0, 3)
    assert np.allclose(J[1].coeffs, [1, 1, 0.5, 1 / 6])


def test_jet_of_square():
    J = curve_jet_at(HoloCurve.from_strings(["1", "z^2"]), 1, 2)
    assert np.allclose(J[1].coeffs, [1, 2, 1])


def test_outside_domain():
    f = HoloCurve.from_strings(["1", "z"], R0=1.0)
    with pytest.raises(OutsideDomain):
        curve_jet_at(f, 1.5, 2)


def test_norm_of_line_is_radial():
    f = HoloCurve.from_strings(["1", "z"])
    for th in np.linspace(0, 2 * np.pi, 7):
        assert math.isclose(curve_norm_log(f, 2 * np.exp(1j * th)), 0.5 * math.log(5), rel_tol=1e-14)


def test_norm_of_constants():
    assert math.isclose(curve_norm_log(HoloCurve.from_strings(["3", "4"]), 0.7), math.log(5))
    assert curve_norm_log(HoloCurve.from_strings(["1", "0", "0"]), 0.1) == 0.0


def test_norm_is_overflow_safe():
    f = HoloCurve.from_strings(["1", "exp(z)"])
    # e^400 is representable but its square is not
    assert math.isclose(curve_norm_log(f, 400.0), 400.0)


def test_recentering_polynomial():
    f = HoloCurve.from_strings(["z", "z^2 + z"])
    assert f.recentered_by == 1
    assert np.allclose(f.values(2.0), [1, 3])


def test_recentering_transcendental():
    f = HoloCurve.from_strings(["z", "z*exp(z)"])
    assert f.recentered_by == 1
    assert np.allclose(f.values(0.0), [1, 1])
    assert np.allclose(f.values(1.0), [1, math.e])


def test_common_factor_is_not_reduced():
    with pytest.raises(NotReduced):
        HoloCurve.from_strings(["z - 1", "z^2 - 1"])


def test_all_zero_coordinates():
    with pytest.raises(AllCoordinatesVanish):
        HoloCurve.from_strings(["0", "0"])


def test_parser_grammar():
    e = parse_expr("2*z^3 - (1+i)*z + exp(z^2/2)")
    z = 0.4 + 0.3j
    assert np.isclose(e.evaluate(z), 2 * z**3 - (1 + 1j) * z + np.exp(z**2 / 2))


def test_parser_reports_position():
    with pytest.raises(ParseError) as err:
        parse_expr("1 + * z")
    assert (err.value.line, err.value.column) == (1, 5)


def test_exp_needs_polynomial_argument():
    with pytest.raises(ParseError):
        parse_expr("exp(exp(z))")


def test_json_round_trip():
    f = HoloCurve.from_json('{"n": 2, "R0": "inf", "coords": ["1", "z", "exp(2*z)"]}')
    g = HoloCurve.from_json(f.to_json())
    assert np.allclose(f.values(0.5 + 0.5j), g.values(0.5 + 0.5j))


def test_json_dimension_check():
    with pytest.raises(DimensionMismatch):
        HoloCurve.from_json('{"n": 2, "coords": ["1", "z"]}')


exprs = st.sampled_from(["exp(z)", "z^3 - 2*z + 1", "exp(z^2 - z) * (1 + z)", "(z + 2)^4 * exp(3*z)"])
points = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


@given(exprs, points, st.integers(1, 12))
def test_jet_consistency(text, z0, K):
    e = parse_expr(text)
    assert np.allclose(e.jet(z0, K)[:K], e.jet(z0, K - 1), rtol=1e-12, atol=1e-12)


@given(exprs, points)
def test_chain_rule(text, z0):
    outer = parse_expr(text)
    inner = polynomial_from_coefficients([0.5, -1, 0, 0.25])
    K = 8
    node = Compose(outer, inner).jet(z0, K)
    ij = inner.jet(z0, K)
    oj = outer.jet(ij[0], K)
    shifted = ij.copy()
    shifted[0] = 0
    direct = _series_compose(oj, shifted)
    expanded = Compose(outer, inner).expand().jet(z0, K)
    scale = np.abs(direct).max()
    assert np.allclose(node, direct, atol=1e-10 * scale, rtol=0)
    assert np.allclose(expanded, direct, atol=1e-10 * scale, rtol=0)
