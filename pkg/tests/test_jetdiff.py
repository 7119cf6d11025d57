import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nevanlab.curve import HoloCurve
from nevanlab.divisor import Arrangement, Hypersurface, LineBundleO
from nevanlab.errors import (
    NotOnDivisor,
    PoleAtEvaluationPoint,
    WeightedDegreeViolation,
)
from nevanlab.jetdiff import (
    GGJetDifferential,
    JetTerm,
    batched_det,
    hyperplane_truncation_check,
    jetdiff_eval,
    metric_norm_eval,
    pole_order,
    truncation_order,
    wronskian_eval,
    wronskian_from_jets,
)
from nevanlab.jets import _series_rescale

curve = HoloCurve.from_strings


def test_wronskian_examples():
    for z in (0, 1.3, -2 + 1j):
        assert np.isclose(wronskian_eval(curve(["1", "z"]), z), 1)
        assert np.isclose(wronskian_eval(curve(["1", "z", "z^2"]), z), 2)
    z = 0.8 - 0.3j
    assert np.isclose(wronskian_eval(curve(["1", "z^5"]), z), 5 * z**4)


def test_batched_det_matches_numpy(rng):
    M = rng.normal(size=(7, 4, 4)) + 1j * rng.normal(size=(7, 4, 4))
    assert np.allclose(batched_det(M), np.linalg.det(M))


def test_log_derivative_terms():
    P = GGJetDifferential(1, 1, 1, 0, (JetTerm(1, [[1]], [1]),))
    assert np.isclose(jetdiff_eval(P, curve(["1", "z"]), 2), 0.5)
    P2 = GGJetDifferential(2, 2, 1, 0, (JetTerm(1, [[0], [1]], [1]),))
    for z in (0, 1.5, -3j):
        assert np.isclose(jetdiff_eval(P2, curve(["1", "exp(z)"]), z), 1)


def test_weighted_degree_violation():
    with pytest.raises(WeightedDegreeViolation):
        GGJetDifferential(2, 2, 1, 0, (JetTerm(1, [[1], [1]]),))


def test_pole_at_evaluation_point():
    P = GGJetDifferential(1, 1, 1, 0, (JetTerm(1, [[1]], [1]),))
    with pytest.raises(PoleAtEvaluationPoint):
        jetdiff_eval(P, curve(["1", "z"]), 0)


def test_chart_coefficients_and_other_charts():
    # coefficient w1^2 on chart 1 of f = (1, z, e^z): w = (1/z, e^z/z)
    P = GGJetDifferential(1, 1, 2, 1, (JetTerm({(2, 0): 3}, [[0, 1]]),))
    z = 0.7 + 0.2j
    w1 = 1 / z
    dw2 = np.exp(z) / z - np.exp(z) / z**2
    assert np.isclose(jetdiff_eval(P, curve(["1", "z", "exp(z)"]), z), 3 * w1**2 * dw2)


def test_log_flags_restricted_to_divisor_components():
    with pytest.raises(ValueError):
        GGJetDifferential(1, 1, 2, 0, (JetTerm(1, [[1, 0]], [1]),), divisor_coords=frozenset({2}))


def test_metric_norm_examples():
    P = GGJetDifferential(1, 0, 1, 0, (JetTerm(1, [[0]]),), LineBundleO(-1))
    f = curve(["1", "z"])
    assert np.isclose(metric_norm_eval(P, f, 0), 1)
    assert np.isclose(metric_norm_eval(P, f, np.exp(0.4j)), 1 / math.sqrt(2))
    P0 = GGJetDifferential(1, 1, 1, 0, (JetTerm(2, [[1]]),), LineBundleO(0))
    assert np.isclose(metric_norm_eval(P0, f, 0.5 + 2j), abs(jetdiff_eval(P0, f, 0.5 + 2j)))


def test_json_round_trip():
    P = GGJetDifferential.from_json(
        '{"k": 2, "m": 2, "n": 2, "chart": 0, "twist": -3,'
        ' "terms": [{"coeff_poly": ["2 * w1^1 w2^2", "1"], "alpha": [[1, 1], [0, 0]], "log_flags": [2]},'
        '           {"coeff_poly": "(0.5+1.0i)", "alpha": [[0, 0], [0, 1]]}]}'
    )
    Q = GGJetDifferential.from_json(P.to_json())
    f = curve(["1", "exp(z) + 2", "z^2 + 1"])
    assert P.twist.a == -3
    assert np.isclose(jetdiff_eval(P, f, 0.3), jetdiff_eval(Q, f, 0.3))


def test_truncation_order_examples():
    x1 = Hypersurface.hyperplane([0, 1])
    assert truncation_order(curve(["1", "z^5"]), x1, 0, 2) == 3
    assert truncation_order(curve(["1", "z"]), x1, 0, 2) == 0
    with pytest.raises(NotOnDivisor):
        truncation_order(curve(["1", "z"]), x1, 1, 2)


def test_truncation_order_transcendental():
    # exp(z) - 1 - z vanishes to order 2 at 0
    f = curve(["1", "exp(z) - 1 - z"])
    x1 = Hypersurface.hyperplane([0, 1])
    assert truncation_order(f, x1, 0, 1) == 1


def test_pole_order_bound():
    f = curve(["1", "z^3"])
    for k, alpha, flags in [(1, [[1]], [1]), (2, [[0], [1]], [1]), (2, [[2], [0]], [1]), (2, [[2], [0]], [])]:
        m = sum((j + 1) * sum(r) for j, r in enumerate(alpha))
        P = GGJetDifferential(k, m, 1, 0, (JetTerm(1, alpha, flags),))
        nu = 3
        assert pole_order(P, f, 0) <= m * min(nu, 1)
    P = GGJetDifferential(2, 2, 1, 0, (JetTerm(1, [[0], [1]], [1]),))
    assert pole_order(P, f, 0) == 2
    assert pole_order(P, f, 0.5) == 0


def test_hyperplane_truncation_small_example():
    arr = Arrangement(tuple(Hypersurface.hyperplane(v) for v in ([1, 0], [0, 1], [1, -1])))
    rows = hyperplane_truncation_check(curve(["1", "z^4"]), arr)
    assert all(r.ok for r in rows)
    assert [(r.factor, r.wronskian_order, r.required) for r in rows if r.factor == "z"] == [("z", 3, 3)]


@st.composite
def differentials(draw):
    n = draw(st.integers(1, 2))
    k = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    terms = []
    for _ in range(draw(st.integers(1, 3))):
        # spread weighted degree m over (j, i) slots
        alpha = [[0] * n for _ in range(k)]
        left = m
        while left:
            j = draw(st.integers(1, min(k, left)))
            i = draw(st.integers(0, n - 1))
            alpha[j - 1][i] += 1
            left -= j
        flags = draw(st.sets(st.integers(1, n)))
        coeff = {tuple(draw(st.integers(0, 2)) for _ in range(n)): draw(st.integers(1, 3))}
        terms.append(JetTerm(coeff, alpha, flags))
    return GGJetDifferential(k, m, n, 0, tuple(terms))


@given(differentials(), st.floats(0.3, 2.0), st.floats(0, 2 * np.pi))
def test_lambda_homogeneity(P, modulus, arg):
    lam = modulus * np.exp(1j * arg)
    coords = ["1", "exp(z) + 2", "z^2 + 1 + z"][: P.n + 1]
    f = curve(coords)
    w = P.chart_jets(f, np.asarray(0.4 + 0.1j), P.k)
    base = P.eval_chart_jets(w)
    scaled = P.eval_chart_jets(np.stack([_series_rescale(wi, lam) for wi in w]))
    assert np.isclose(scaled, lam**P.m * base, rtol=1e-10, atol=1e-12 * abs(base))


def test_linear_change_of_coordinates(rng):
    f = curve(["1", "exp(z)", "z^3 - z"])
    for _ in range(5):
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        z = complex(rng.normal(), rng.normal())
        J = f.jets(np.asarray(z), 2)
        AJ = np.einsum("ij,jk->ik", A, J)
        assert np.isclose(wronskian_from_jets(AJ), np.linalg.det(A) * wronskian_from_jets(J), rtol=1e-10)
