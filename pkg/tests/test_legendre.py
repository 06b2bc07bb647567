import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import legendre as npleg

from hbvm.legendre import gauss_rule, legendre_eval, legendre_integral_eval, legendre_table

LISTED = [
    lambda t: 1.0,
    lambda t: 2 * t - 1,
    lambda t: 6 * t**2 - 6 * t + 1,
    lambda t: 20 * t**3 - 30 * t**2 + 12 * t - 1,
]


@pytest.mark.parametrize("j,t,expected", [(0, 0.3, 1.0), (2, 0.0, 1.0), (1, 0.5, 0.0), (3, 1.0, 1.0)])
def test_legendre_eval_examples(j, t, expected):
    assert legendre_eval(j, t) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("j", range(4))
def test_matches_listed_polynomials(j):
    ts = np.linspace(0, 1, 11)
    assert np.allclose(legendre_eval(j, ts), [LISTED[j](t) for t in ts], atol=1e-14)


@pytest.mark.parametrize("j", [5, 10, 20, 40])
def test_matches_numpy_legendre(j):
    ts = np.linspace(0, 1, 17)
    coef = np.zeros(j + 1)
    coef[j] = 1
    assert np.allclose(legendre_eval(j, ts), npleg.legval(2 * ts - 1, coef), atol=1e-12)


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        legendre_eval(-1, 0.5)
    with pytest.raises(ValueError):
        legendre_integral_eval(-2, 0.5)


@pytest.mark.parametrize("j,t,expected", [(0, 0.7, 0.7), (2, 1.0, 0.0), (1, 0.5, -0.25)])
def test_integral_examples(j, t, expected):
    assert legendre_integral_eval(j, t) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("j", range(11))
@pytest.mark.parametrize("t", [0.1, 0.37, 0.5, 0.9, 1.0])
def test_integral_against_numpy_gauss(j, t):
    x, w = npleg.leggauss(20)
    nodes = 0.5 * t * (x + 1)
    val = 0.5 * t * float(np.dot(w, legendre_eval(j, nodes)))
    assert abs(legendre_integral_eval(j, t) - val) <= 1e-13


@pytest.mark.parametrize("j", range(9))
@pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
def test_integral_differentiates_back(j, t):
    d = 1e-6
    fd = (legendre_integral_eval(j, t + d) - legendre_integral_eval(j, t - d)) / (2 * d)
    assert abs(fd - legendre_eval(j, t)) <= 1e-8


def test_integral_over_unit_interval():
    for j in range(11):
        assert abs(legendre_integral_eval(j, 1.0) - (j == 0)) <= 1e-14


def test_gauss_small_rules():
    r1 = gauss_rule(1)
    assert r1.nodes.tolist() == [0.5] and r1.weights.tolist() == [1.0]
    r2 = gauss_rule(2)
    s = 1 / math.sqrt(3)
    assert np.allclose(r2.nodes, [(1 - s) / 2, (1 + s) / 2], atol=1e-15, rtol=0)
    assert np.allclose(r2.weights, [0.5, 0.5], atol=1e-15, rtol=0)
    r3 = gauss_rule(3)
    s = math.sqrt(3 / 5)
    assert np.allclose(r3.nodes, [(1 - s) / 2, 0.5, (1 + s) / 2], atol=1e-15, rtol=0)
    assert np.allclose(r3.weights, [5 / 18, 8 / 18, 5 / 18], atol=1e-15, rtol=0)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 12, 20, 33, 64])
def test_gauss_rule_invariants(k):
    rule = gauss_rule(k)
    assert rule.k == k and rule.precision == 2 * k - 1
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all((rule.nodes > 0) & (rule.nodes < 1))
    assert np.all(rule.weights > 0)
    assert abs(rule.weights.sum() - 1) <= 1e-14
    assert np.all(np.abs(rule.nodes + rule.nodes[::-1] - 1) <= 1e-14)
    # the nodes are roots of P_k
    assert np.all(np.abs(legendre_eval(k, rule.nodes)) <= 1e-13 * k)
    x, w = npleg.leggauss(k)
    assert np.allclose(rule.nodes, (x + 1) / 2, atol=1e-14, rtol=0)
    assert np.allclose(rule.weights, w / 2, atol=1e-14, rtol=0)


@pytest.mark.parametrize("k", [0, 65, 2.5, -3])
def test_gauss_rule_range(k):
    with pytest.raises(ValueError):
        gauss_rule(k)


def test_orthogonality_table():
    rule = gauss_rule(12)
    P = legendre_table(10, rule.nodes)
    gram = (P * rule.weights) @ P.T
    assert np.allclose(gram, np.diag(1.0 / (2 * np.arange(11) + 1)), atol=1e-13, rtol=0)


@given(st.integers(min_value=0, max_value=12), st.floats(min_value=0.0, max_value=1.0))
def test_integral_is_antiderivative_closed_form(j, t):
    # int_0^t P_j via the numpy power series (independent route)
    coef = np.zeros(j + 1)
    coef[j] = 1
    anti = npleg.legint(coef, lbnd=-1)  # in x = 2t - 1, d/dx = (1/2) d/dt
    assert legendre_integral_eval(j, t) == pytest.approx(0.5 * npleg.legval(2 * t - 1, anti), abs=1e-13)
