import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qortho.kernels import densities
from qortho.kernels.densities import DensitySpec, density, gram_matrix, integrate
from qortho.qcore import q_pochhammer_inf, support_radius


@pytest.mark.parametrize("kind, params, x, expected", [
    ("fN", {}, 0.3, 0.35765180874711766),
    ("fCN", {"y": 0.7, "rho": 0.5}, -0.2, 0.34855030940462217),
    ("fR", {"beta": 0.3}, 1.0, 0.2356588847997441),
    ("fbN", {"a": 0.4}, -1.0, 0.15923820184272433),
])
def test_frozen_density_values(kind, params, x, expected):
    assert_allclose(density(DensitySpec.of(kind, 0.5, **params), x), expected, rtol=1e-12)


def test_q0_semicircle_and_q1_gaussian():
    xs = np.linspace(-1.9, 1.9, 9)
    assert_allclose(density(DensitySpec.of("fN", 0.0), xs), np.sqrt(4 - xs**2) / (2 * math.pi), rtol=1e-12)
    xs = np.linspace(-4, 4, 9)
    assert_allclose(density(DensitySpec.of("fN", 1), xs), np.exp(-xs**2 / 2) / math.sqrt(2 * math.pi), rtol=1e-14)


def test_density_vanishes_outside_support():
    spec = DensitySpec.of("fN", 0.5)
    r = support_radius(0.5)
    assert density(spec, r * 1.01) == 0
    assert density(spec, -r * 1.5) == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        DensitySpec.of("fX", 0.5)
    with pytest.raises(ValueError):
        DensitySpec.of("fCN", 0.5, y=0.1)
    with pytest.raises(ValueError):
        DensitySpec.of("fCN", 0.5, y=5.0, rho=0.3)
    with pytest.raises(ValueError):
        DensitySpec.of("fbN", 0.5, a=1.2)
    with pytest.raises(ValueError):
        DensitySpec.of("fR", 1, beta=0.3)
    with pytest.raises(ValueError):
        DensitySpec.of("fN", -1)


@pytest.mark.parametrize("kind, params", [("fN", {}), ("fbN", {"a": -0.6}), ("fCN", {"y": -1.0, "rho": -0.7}),
                                          ("fR", {"beta": 0.6})])
@pytest.mark.parametrize("q", [-0.5, 0.0, 0.5, 0.9])
def test_unit_mass(kind, params, q):
    res = integrate(lambda X, c: np.ones_like(X), DensitySpec.of(kind, q, **params))
    assert res.converged
    assert_allclose(res.value, 1.0, atol=1e-10)


def test_log_pochhammer_matches_product():
    for a, q in ((0.5, 0.5), (-0.7, 0.9), (0.3, -0.5)):
        val, ok = densities.log_qpoch_inf(a, q)
        assert ok
        assert_allclose(math.exp(val), q_pochhammer_inf(a, q), rtol=1e-12)


@pytest.mark.parametrize("family", sorted(densities.PAIRINGS))
def test_gram_matrix_small(family):
    g = gram_matrix(family, 5, 0.3)
    assert g.converged
    assert g.max_offdiag() < 1e-8
    assert g.max_rel_diag_error() < 1e-8


def test_orthogonality_helpers():
    assert abs(densities.orthogonality_integral("qHermite_H", 2, 3, 0.5).value) < 1e-12
    assert_allclose(densities.orthogonality_integral("qHermite_H", 3, 3, 0.5).value,
                    densities.orthogonality_norm("qHermite_H", 3, 0.5), rtol=1e-10)


@settings(max_examples=10)
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_chapman_kolmogorov(u, v, r1, r2):
    q = 0.4
    r = support_radius(q)
    assert densities.chapman_kolmogorov_check(u * r, v * r, r1, r2, q) < 1e-5


def test_chapman_kolmogorov_gaussian():
    assert densities.chapman_kolmogorov_check(0.4, -1.1, 0.5, -0.6, 1) < 1e-8


@pytest.mark.parametrize("q", [-0.5, 0.5, 0.9, 1])
def test_eigen_integrals(q):
    for n in range(1, 7):
        r = densities.eigen_integral_checks(n, 0.7, 0.4, q)
        assert r.hermite < 1e-5 and r.asc < 1e-5
    with pytest.raises(ValueError):
        densities.eigen_integral_checks(0, 0.7, 0.4, q)
