from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import chebyshev, hermite_e
from numpy.testing import assert_allclose

from qortho.poly import CoeffPoly
from qortho.polyfam import (RESCALE_PAIRS, Family, FamilySpec, H, R, T, U, coeffs, eval_trig, evaluate, generating_partial_sum,
                            h, horner, rescale_check, rogers_szego, sequence)
from qortho.qcore import q_pochhammer, support_radius

HALF = Fraction(1, 2)
unit = st.floats(-1, 1)
q_open = st.floats(-0.9, 0.9)


# ---------------------------------------------------------------- frozen coefficient oracles

@pytest.mark.parametrize("family, n, params, expected", [
    ("qHermite_H", 5, {}, [0, Fraction(103, 16), 0, Fraction(-49, 8), 0, 1]),
    ("ASC_P", 3, {"y": Fraction(1, 3), "rho": Fraction(2, 5)},
     [Fraction(1429, 6750), Fraction(-496, 225), Fraction(-7, 30), 1]),
    ("Ultra_R", 3, {"beta": Fraction(1, 5)}, [0, Fraction(-261, 125), 0, Fraction(171, 250)]),
    ("bigqHermite_H", 3, {"a": Fraction(1, 3)}, [Fraction(125, 216), Fraction(-173, 72), Fraction(-7, 12), 1]),
    ("qInvHermite_B", 4, {}, [Fraction(7, 16), 0, Fraction(11, 32), 0, Fraction(1, 64)]),
])
def test_exact_coefficients(family, n, params, expected):
    assert coeffs(FamilySpec.of(family, HALF, **params), n) == CoeffPoly(expected)


def test_minus_one_index():
    spec = FamilySpec.of("qHermite_H", 0.5)
    assert evaluate(spec, -1, 0.7) == 0
    assert sequence(spec, -1, 0.7) == []
    assert coeffs(spec, -1).degree == -1
    with pytest.raises(ValueError):
        sequence(spec, -2, 0.7)


def test_missing_parameters():
    with pytest.raises(ValueError):
        FamilySpec.of("ASC_P", 0.5, y=0.1)
    with pytest.raises(ValueError):
        FamilySpec.of("NotAFamily", 0.5)


# ---------------------------------------------------------------- classical cross-checks

@given(st.integers(0, 12), st.floats(-4, 4))
def test_q1_hermite_is_probabilists_hermite(n, x):
    c = np.zeros(n + 1)
    c[n] = 1
    assert_allclose(H(n, x, 1), hermite_e.hermeval(x, c), rtol=1e-10, atol=1e-10)


@given(st.integers(0, 15), unit)
def test_chebyshev_against_numpy(n, x):
    c = np.zeros(n + 1)
    c[n] = 1
    assert_allclose(T(n, x), chebyshev.chebval(x, c), atol=1e-10)
    assert_allclose(eval_trig("Cheb_U", n, x), U(n, x), atol=1e-9)


@given(st.integers(0, 12), st.floats(-1.99, 1.99))
def test_q0_hermite_is_chebyshev_u(n, x):
    assert_allclose(H(n, x, 0), U(n, x / 2), atol=1e-9)


@given(st.integers(0, 10), st.floats(-1.5, 1.5), q_open)
def test_R_at_beta_zero_is_H(n, x, q):
    assert_allclose(R(n, x, 0.0, q), H(n, x, q), rtol=1e-9, atol=1e-9)


@given(st.integers(0, 10), unit, st.floats(-0.9, 0.9).filter(lambda q: abs(q) > 1e-3))
def test_R_at_beta_q_is_chebyshev_u(n, u, q):
    # R_n(x|q,q)/(q)_n = U_n(x sqrt(1-q)/2) / (1-q)^(n/2)
    x = u * support_radius(q)
    lhs = R(n, x, q, q) / q_pochhammer(q, q, n)
    rhs = U(n, u) / (1 - q) ** (n / 2)
    assert_allclose(lhs, rhs, rtol=1e-8, atol=1e-8 * max(1, abs(rhs)))


@given(st.integers(0, 12), unit, q_open)
def test_h_trigonometric_form(n, x, q):
    assert_allclose(h(n, x, q), eval_trig("qHermite_h", n, x, q), atol=1e-9)
    assert_allclose(h(n, x, q), eval_trig("RogersSzego_link", n, x, q), atol=1e-9)


@given(st.integers(0, 8), unit, q_open, st.floats(-0.8, 0.8))
def test_trig_forms_with_parameters(n, x, q, p):
    assert_allclose(evaluate(FamilySpec.of("bigqHermite_h", q, a=p), n, x),
                    eval_trig("bigqHermite_h", n, x, q, a=p), atol=1e-9)
    assert_allclose(evaluate(FamilySpec.of("Ultra_C", q, beta=p), n, x),
                    eval_trig("Ultra_C", n, x, q, beta=p), atol=1e-9)


def test_trig_unknown_family():
    with pytest.raises(ValueError):
        eval_trig("ASC_P", 2, 0.3)


@given(st.integers(0, 10), st.floats(-2, 2), st.fractions(Fraction(-9, 10), Fraction(9, 10)))
def test_rogers_szego_recurrence(n, x, q):
    assert_allclose(evaluate(FamilySpec(Family.RogersSzego_s, q), n, x), float(rogers_szego(n, x, q)),
                    rtol=1e-9, atol=1e-9)


@given(st.integers(0, 12), unit, q_open)
def test_horner_matches_recurrence(n, u, q):
    spec = FamilySpec.of("ASC_P", q, y=0.4, rho=0.5)
    x = u * support_radius(q) * 0.95
    val = evaluate(spec, n, x)
    assert_allclose(horner(coeffs(spec, n), x), val, rtol=1e-9, atol=1e-9 * max(1, abs(val)))


def test_exact_and_float_agree():
    spec_f = FamilySpec.of("ASC_Q", 0.3, a=0.2, b=-0.5)
    spec_e = FamilySpec.of("ASC_Q", Fraction(3, 10), a=Fraction(1, 5), b=Fraction(-1, 2))
    for n in range(9):
        assert_allclose(float(coeffs(spec_e, n)(Fraction(1, 7))), evaluate(spec_f, n, 1 / 7), rtol=1e-12, atol=1e-14)


# ---------------------------------------------------------------- rescaling and generating functions

@pytest.mark.parametrize("pair", RESCALE_PAIRS)
@given(n=st.integers(0, 12), u=st.floats(-0.95, 0.95))
def test_rescale_pairs(pair, n, u):
    params = {"y": 0.7, "rho": 0.5} if pair in ("Q-P", "p-P") else ({"beta": 0.3} if pair == "C-R" else {})
    x = u * support_radius(0.5)
    assert rescale_check(pair, n, x, 0.5, **params) < 1e-10 * max(1.0, 2.0**n)


def test_rescale_trivial_and_errors():
    assert rescale_check("h-H", 0, 0.3, 0.5) == 0
    with pytest.raises(ValueError):
        rescale_check("x-X", 2, 0.3, 0.5)
    with pytest.raises(ValueError):
        rescale_check("h-H", 2, 0.3, 1)


@pytest.mark.parametrize("family, params, lower", [
    ("qHermite_H", {}, False), ("qHermite_h", {}, True), ("bigqHermite_H", {"a": 0.4}, False),
    ("ASC_P", {"y": 0.7, "rho": 0.5}, False), ("Ultra_R", {"beta": 0.3}, False), ("Cheb_U", {}, True),
    ("Cheb_T", {}, True), ("Hermite_H", {}, False),
])
def test_generating_functions(family, params, lower):
    q = 0.5 if family != "Hermite_H" else 1
    r = 1.0 if lower else (3.0 if q == 1 else support_radius(q))
    for x in np.linspace(-0.9 * r, 0.9 * r, 5):
        g = generating_partial_sum(FamilySpec.of(family, q, **params), float(x), 0.3, 150)
        assert not g.diverging
        assert_allclose(g.partial, g.closed, rtol=1e-10)
