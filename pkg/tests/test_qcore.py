import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qortho.qcore import (QParam, TruncationPolicy, aux_product, aux_quadratic, product_identity_check, q_binomial,
                          q_bracket, q_factorial, q_pochhammer, q_pochhammer_inf, rogers_szego_at_one, support_radius,
                          truncation_length)

q_open = st.floats(-0.9, 0.9)
unit = st.floats(-1, 1)


def test_bracket_and_factorial_exact():
    q = Fraction(1, 2)
    assert q_bracket(0, q) == 0
    assert q_bracket(3, q) == Fraction(7, 4)
    assert q_factorial(3, q) == Fraction(1) * Fraction(3, 2) * Fraction(7, 4)
    assert q_factorial(5, 1) == 120
    assert q_bracket(4, 0) == 1


def test_binomial_table():
    q = Fraction(1, 2)
    assert q_binomial(4, 2, q) == Fraction(35, 16)
    assert q_binomial(4, 5, q) == 0
    assert q_binomial(4, -1, q) == 0
    assert [q_binomial(5, k, 1) for k in range(6)] == [1, 5, 10, 10, 5, 1]


def test_negative_indices_rejected():
    with pytest.raises(ValueError):
        q_bracket(-1, 0.5)
    with pytest.raises(ValueError):
        q_factorial(-2, 0.5)
    with pytest.raises(ValueError):
        q_pochhammer(0.3, 0.5, -1)


def test_qparam_domain():
    assert QParam(1).support == (-math.inf, math.inf)
    assert_allclose(QParam(0.5).support[1], 2 / math.sqrt(0.5))
    assert not QParam(1).allows_infinite_products
    for bad in (-1, 1.5):
        with pytest.raises(ValueError):
            QParam(bad)


def test_policy_validation_and_env(monkeypatch):
    with pytest.raises(ValueError):
        TruncationPolicy(max_terms=0)
    with pytest.raises(ValueError):
        TruncationPolicy(abs_tol=0)
    monkeypatch.setenv("QORTHO_MAX_TERMS", "77")
    assert TruncationPolicy.from_env().max_terms == 77
    assert TruncationPolicy.from_env(max_terms=5).max_terms == 5


def test_pochhammer_inf_oracles():
    assert_allclose(q_pochhammer_inf(0.5, 0.5), 0.2887880950866044, rtol=1e-14)
    assert_allclose(q_pochhammer_inf(0.5, -0.5), 0.5686989462654277, rtol=1e-14)
    assert q_pochhammer_inf(0.0, 0.7) == 1
    with pytest.raises(ValueError):
        q_pochhammer_inf(0.5, 1)


def test_pochhammer_inf_reports_truncation():
    val, n, ok = q_pochhammer_inf(0.9, 0.99, TruncationPolicy(max_terms=10), full_output=True)
    assert n == 10 and not ok
    _, n, ok = q_pochhammer_inf(0.9, 0.5, full_output=True)
    assert ok and n < 60


def test_truncation_length_bound():
    n, ok = truncation_length(1.0, 0.5)
    assert ok
    assert 0.5**n / 0.5 < 1e-14 <= 0.5 ** (n - 1) / 0.5


@given(st.floats(-0.95, 0.95), q_open, st.integers(0, 30))
def test_pochhammer_split(a, q, n):
    # (a)_inf = (a)_n (a q^n)_inf
    assert_allclose(q_pochhammer_inf(a, q), q_pochhammer(a, q, n) * q_pochhammer_inf(a * q**n, q),
                    rtol=1e-11, atol=1e-13)


@given(st.integers(0, 12), st.integers(0, 12), st.fractions(Fraction(-9, 10), Fraction(9, 10)))
def test_pascal_rule(n, k, q):
    # [n+1, k] = [n, k-1] + q^k [n, k]
    assert q_binomial(n + 1, k, q) == q_binomial(n, k - 1, q) + q**k * q_binomial(n, k, q)


@given(st.integers(0, 10), st.fractions(Fraction(-9, 10), Fraction(9, 10)))
def test_binomial_symmetry_and_rogers_szego(n, q):
    assert all(q_binomial(n, k, q) == q_binomial(n, n - k, q) for k in range(n + 1))
    assert rogers_szego_at_one(n, q) == sum(q_binomial(n, k, q) for k in range(n + 1))


@given(unit, st.floats(-0.9, 0.9), q_open)
def test_rozklv(x, a, q):
    assert product_identity_check("rozklv", x, a=a, q=q) < 1e-10


@given(unit, unit, st.floats(-0.9, 0.9), q_open)
def test_rozklw(x, y, t, q):
    assert product_identity_check("rozklw", x, y, t=t, q=q) < 1e-10 * max(1, aux_product("w", x, y, t, q=q))


@given(unit, st.floats(-0.9, 0.9), q_open)
def test_rozkll(x, a, q):
    assert product_identity_check("rozkll", x, a=a, q=q) < 1e-10 * max(1, aux_product("l", x, a, q=q))


def test_trivial_product_identity():
    assert product_identity_check("rozklv", 0.3, a=0.0, q=0.5) == 0
    with pytest.raises(ValueError):
        product_identity_check("nope", 0.3)


def test_aux_quadratic_rescaling():
    # W(x, y, t) on S(q) is w at the rescaled points x sqrt(1-q)/2
    q, x, y, t = 0.4, 1.1, -0.7, 0.6
    s = math.sqrt(1 - q) / 2
    for k in range(4):
        assert_allclose(aux_quadratic("W", k, x, y, t, q=q), aux_quadratic("w", k, x * s, y * s, t, q=q))
        assert_allclose(aux_quadratic("V", k, x, t, q=q), aux_quadratic("v", k, x * s, t * math.sqrt(1 - q), q=q))
    with pytest.raises(ValueError):
        aux_quadratic("Z", 0, 1.0, q=q)
    with pytest.raises(TypeError):
        aux_quadratic("w", 0, 1.0, q=q)


def test_aux_product_vectorized():
    xs = np.linspace(-1, 1, 7)
    vec = aux_product("v", xs, 0.4, q=0.5)
    assert_allclose(vec, [aux_product("v", float(x), 0.4, q=0.5) for x in xs], rtol=1e-14)


def test_aux_product_oracle():
    assert_allclose(aux_product("W", 0.4, -0.8, 0.6, q=0.5), 0.627655802187308, rtol=1e-13)


def test_support_radius():
    assert support_radius(1) == math.inf
    assert_allclose(support_radius(0), 2.0)
    assert_allclose(support_radius(QParam(0.75)), 4.0)
