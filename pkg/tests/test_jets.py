import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nevanlab import config
from nevanlab.errors import DivisionByZeroSeries, MismatchedBasePoint
from nevanlab.jets import SATURATED, JetSeries, series_arith, vanishing_order

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


def series(order=6):
    return st.lists(cplx, min_size=order + 1, max_size=order + 1).map(lambda c: JetSeries(0j, c))


def close(a, b, tol=1e-12):
    scale = max(1.0, np.abs(a.coeffs).max(), np.abs(b.coeffs).max())
    return np.allclose(a.coeffs, b.coeffs, rtol=0, atol=tol * scale)


def test_mul_difference_of_squares():
    a = JetSeries(0, [1, 1, 0])
    b = JetSeries(0, [1, -1, 0])
    assert np.allclose((a * b).coeffs, [1, 0, -1])


def test_div_geometric_series():
    one = JetSeries.constant(1, 3)
    assert np.allclose((one / JetSeries(0, [1, -1, 0, 0])).coeffs, [1, 1, 1, 1])


def test_rescale_scales_by_powers():
    assert np.allclose(series_arith("rescale", JetSeries(0, [0, 1, 1]), lam=2).coeffs, [0, 2, 4])


def test_derivative_of_exp_series():
    e = JetSeries(0, [1, 1, 0.5, 1 / 6])
    d = series_arith("derivative", e)
    assert d.order == 2
    assert np.allclose(d.coeffs, [1, 1, 0.5])


def test_orders_truncate_to_shorter_operand():
    a = JetSeries(0, [1, 2, 3, 4])
    b = JetSeries(0, [1, 1])
    assert (a + b).order == 1
    assert (a * b).order == 1


def test_mismatched_base_point():
    with pytest.raises(MismatchedBasePoint):
        JetSeries(0, [1, 2]) + JetSeries(1, [1, 2])


def test_division_by_zero_series():
    with pytest.raises(DivisionByZeroSeries):
        JetSeries(0, [1, 2]) / JetSeries(0, [0, 0])


def test_division_factors_common_vanishing_order():
    # (t^2 + t^3) / (t + t^2) = t
    q = JetSeries(0, [0, 0, 1, 1]) / JetSeries(0, [0, 1, 1, 0])
    assert np.allclose(q.coeffs[:2], [0, 1])


def test_division_with_pole_is_rejected():
    with pytest.raises(DivisionByZeroSeries):
        JetSeries(0, [1, 0, 0]) / JetSeries(0, [0, 1, 0])


def test_vanishing_order_examples():
    assert vanishing_order(JetSeries(0, [0, 0, 0, 0, 0, 1, 0])) == 5
    assert vanishing_order(JetSeries(0, [1 / math.factorial(j) for j in range(8)])) == 0
    assert vanishing_order(JetSeries(0, [0, 0, 0])) is SATURATED


def test_vanishing_order_ignores_roundoff():
    assert vanishing_order(JetSeries(0, [1e-17, 3e-16, 2.0, 1.0])) == 2


def test_exp_series_matches_factorials():
    e = JetSeries(0, [0, 1, 0, 0, 0, 0]).exp()
    assert np.allclose(e.coeffs, [1 / math.factorial(j) for j in range(6)])


def test_derivatives_use_factorials():
    assert np.allclose(JetSeries(0, [1, 1, 1, 1]).derivatives(), [1, 1, 2, 6])


def test_extended_precision_dtype():
    with config.precision("extended"):
        a = JetSeries(0, [1, 2])
        assert a.coeffs.dtype == np.clongdouble


@given(series(), series(), series())
def test_distributive_law(a, b, c):
    assert close((a + b) * c, a * c + b * c)


@given(series())
def test_inverse(a):
    if abs(a.coeffs[0]) < 0.5:
        a = a + (1 - a.coeffs[0])
    one = a * (1 / a)
    assert close(one, JetSeries.constant(1, a.order), 1e-12 * max(1, np.abs(a.coeffs).max()) ** 7)


@given(series(), series())
def test_leibniz(a, b):
    lhs = (a * b).derivative()
    rhs = a.derivative() * b.truncate(a.order - 1) + a.truncate(a.order - 1) * b.derivative()
    assert close(lhs, rhs)


@given(series(), cplx, cplx)
def test_rescale_composes(a, lam, mu):
    assert close(a.rescale(lam).rescale(mu), a.rescale(lam * mu), 1e-12 * max(1, abs(lam), abs(mu)) ** 6)
