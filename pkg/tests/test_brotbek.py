import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nevanlab.brotbek import (
    BrotbekParams,
    alpha_threshold,
    decompose,
    degree_bound,
    params,
    r0_product_form,
    r0_sum_form,
    report,
    verify_chain,
    with_degree,
)
from nevanlab.errors import BelowThreshold, BoundViolation, ParameterViolation, PreconditionViolation

SWEEP = [(n, c) for n in range(2, 7) for c in range(3, 11)]


def test_params_worked_instance():
    P = params(2, 3)
    assert (P.k, P.kp, P.delta) == (3, 6, 11)
    assert P.r0 == 19602 == 3 * 121 * 6 + 121 * 144
    assert P.threshold == 215677


@pytest.mark.parametrize("n,c", SWEEP)
def test_r0_forms_and_kprime_identity(n, c):
    assert r0_sum_form(n, c) == r0_product_form(n, c)
    P = params(n, c)
    assert 2 * P.kp == P.delta + 1 == (n + 1) * (n + 2)


def test_parameter_violations():
    with pytest.raises(ParameterViolation):
        params(1, 3)
    with pytest.raises(ParameterViolation):
        params(2, 2)
    with pytest.raises(ParameterViolation):
        degree_bound(1, 5)


def test_degree_bound_examples():
    assert degree_bound(2, 3) == Fraction(14348907, 32)
    for n, c in SWEEP:
        b = degree_bound(n, c)
        if c % 2 == 0:
            assert b.denominator == 1
        if c < 10:
            assert degree_bound(n, c + 1) > b
        if n < 6:
            assert degree_bound(n + 1, c) > b


def test_decompose_worked_instance():
    dec = decompose(250000, 2, 3)
    assert (dec.eps, dec.r, dec.r_bound) == (3, 22724, 15246)
    assert 2178 + 121 * 3 * 36 == 15246
    with pytest.raises(BelowThreshold):
        decompose(215676, 2, 3)


@pytest.mark.parametrize("n,c", [(2, 3), (3, 4), (6, 10)])
def test_decompose_sweep_above_threshold(n, c):
    P = params(n, c)
    for d in range(P.threshold, P.threshold + 10 * P.delta + 1):
        dec = decompose(d, n, c)
        assert P.k <= dec.eps <= P.k + P.delta - 1
        assert d == dec.eps + (dec.r + P.k) * P.delta
        assert dec.r > dec.r_bound


@given(st.integers(2, 6), st.integers(3, 10), st.integers(0, 10**6))
def test_decompose_above_degree_bound(n, c, extra):
    d = math.ceil(degree_bound(n, c)) + extra
    dec = decompose(d, n, c)
    assert dec.r > dec.r_bound


def test_verify_chain_worked_instance():
    rep = verify_chain(2, 3)
    assert rep["a"].lhs == 138 and rep["a"].rhs == 144 and rep["a"].passed
    assert rep["b"].lhs == 215677 and rep["b"].rhs == 279936 and rep["b"].passed
    assert rep["d"].rhs == Fraction(14348907, 32) and rep["d"].passed
    # the intermediate comparison is an equality at the boundary case
    assert rep["c"].lhs == rep["c"].rhs == Fraction(27, 2)
    assert not rep["c"].passed
    assert not rep.all_passed


def test_verify_chain_sweep():
    failures_c = []
    for n, c in SWEEP:
        rep = verify_chain(n, c)
        for name in ("r0_dual", "kprime", "a", "b", "d"):
            assert rep[name].passed, (n, c, name)
        if not rep["c"].passed:
            failures_c.append((n, c))
    assert failures_c == [(2, 3)]


def test_alpha_threshold_worked_instance():
    P = with_degree(2, 3, 250000)
    at = alpha_threshold(P)
    assert at.alpha_min == 1
    assert at.ratio_limit == Fraction(9656, 726)
    assert at.mt_alpha == 9656 and at.m_alpha == 726


def test_alpha_threshold_large_beta_tilde_is_minimal():
    P = with_degree(2, 3, 250000, beta=0, beta_t=10**6)
    at = alpha_threshold(P)
    g, h = 9656, 726

    def holds(a):
        return a * g - 10**6 > 3 * a * h and a * g - 10**6 > 0

    assert holds(at.alpha_min) and not holds(at.alpha_min - 1)
    assert at.alpha_min == 134


@given(st.integers(0, 10**5), st.integers(0, 10**7))
def test_alpha_threshold_minimal_property(beta, beta_t):
    at = alpha_threshold(with_degree(2, 4, 400000, beta, beta_t))
    P = with_degree(2, 4, 400000)
    h = P.delta ** (P.k - 1) * P.kp
    g = P.r - P.delta ** (P.k - 1) * P.k * (P.eps + P.k * P.delta)

    def holds(a):
        mt, m = a * g - beta_t, beta + a * h
        return mt > 4 * m and mt > 0

    assert holds(at.alpha_min)
    assert at.alpha_min == 0 or not holds(at.alpha_min - 1)


def test_alpha_threshold_at_r_threshold():
    P = params(2, 3)
    eps = 3
    r = 15246
    d = eps + (r + P.k) * P.delta
    partial = BrotbekParams(2, 3, P.k, P.kp, P.delta, P.r0, d, eps, r)
    with pytest.raises(PreconditionViolation):
        alpha_threshold(partial)


def test_params_revalidate_on_construction():
    P = params(2, 3)
    with pytest.raises(BoundViolation):
        BrotbekParams(2, 3, P.k, P.kp, P.delta, P.r0 + 1)
    with pytest.raises(BoundViolation):
        BrotbekParams(2, 3, P.k, P.kp, P.delta, P.r0, 250000, 2, 22724)


def test_report_is_plain_data():
    out = report(2, 3, 250000)
    assert out["params"]["r0"] == 19602
    assert out["degree_bound"] == "14348907/32"
    assert out["decomposition"] == {"eps": 3, "r": 22724, "r_bound": 15246}
    assert out["alpha"]["alpha_min"] == 1
    assert out["chain"]["all_passed"] is False
