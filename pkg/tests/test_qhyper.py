import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qortho.qcore import TruncationPolicy, q_pochhammer, q_pochhammer_inf
from qortho.qhyper import PhiSpec, PoleError, phi, phi_term, very_well_poised_spec, very_well_poised_W

small = st.floats(-0.8, 0.8)
q_open = st.floats(-0.8, 0.8).filter(lambda q: abs(q) > 1e-3)


def test_frozen_values():
    assert_allclose(phi(PhiSpec([0.3, 0.4], [0.6], 0.5, 0.2)).value.real, 1.5596142488294973, rtol=1e-13)
    res = very_well_poised_W(4, 0.1, [0.2, 0.3, 0.4, 0.5, 0.6], 0.5, 0.05)
    assert res.converged
    assert_allclose(res.value.real, 1.0149803969248898, rtol=1e-13)


@given(small, small, q_open)
def test_q_binomial_theorem(a, z, q):
    res = phi(PhiSpec([a], [], q, z))
    assert res.converged
    assert_allclose(res.value.real, q_pochhammer_inf(a * z, q) / q_pochhammer_inf(z, q), rtol=1e-11)


@given(st.integers(0, 10), small, st.floats(-0.8, 0.8), q_open)
def test_q_chu_vandermonde(n, b, c, q):
    # 2phi1(q^-n, b; c; q, q) = (c/b)_n b^n / (c)_n
    assume(abs(b) > 0.05 and abs(q_pochhammer(c, q, n)) > 1e-3)
    spec = PhiSpec([q ** -n, b], [c], q, q)
    res = phi(spec)
    assert res.terminated or n == 0 or res.converged
    want = q_pochhammer(c / b, q, n) * b**n / q_pochhammer(c, q, n)
    # the alternating terms can be many orders larger than the sum
    scale = sum(abs(phi_term(spec, k)) for k in range(n + 1))
    assert_allclose(res.value.real, want, rtol=1e-8, atol=1e-13 * scale)


@given(st.floats(0.05, 0.8), st.floats(0.2, 0.7), st.floats(0.2, 0.7), st.floats(0.2, 0.7), st.floats(0.3, 0.8))
def test_six_w_five_summation(z, b, c, d, q):
    a = z * b * c * d / q  # argument a q / (b c d) = z
    res = very_well_poised_W(3, a, [b, c, d], q, z)
    num = [a * q, a * q / (b * c), a * q / (b * d), a * q / (c * d)]
    den = [a * q / b, a * q / c, a * q / d, a * q / (b * c * d)]
    want = 1.0
    for u, v in zip(num, den):
        want *= q_pochhammer_inf(u, q) / q_pochhammer_inf(v, q)
    assert_allclose(res.value.real, want, rtol=1e-9)


@given(st.lists(small, min_size=1, max_size=3), st.lists(small, max_size=2), q_open, st.floats(-0.5, 0.5),
       st.integers(0, 6))
def test_ratio_recursion_matches_direct_terms(nums, dens, q, z, n):
    assume(all(abs(q_pochhammer(b, q, n)) > 1e-3 for b in dens))
    spec = PhiSpec(nums, dens, q, z)
    partial = phi(spec, TruncationPolicy(max_terms=n + 1, abs_tol=1e-300, rel_tol=1e-300))
    assert_allclose(partial.value, sum(phi_term(spec, k) for k in range(n + 1)), rtol=1e-10, atol=1e-14)


def test_terminating_series():
    q = 0.5
    res = phi(PhiSpec([q**-3, 0.2], [0.7], q, q))
    assert res.terminated and res.terms == 4


def test_pole_guard():
    q = 0.5
    with pytest.raises(PoleError):
        phi(PhiSpec([0.3], [q**-2], q, 0.2))


def test_domain_errors():
    with pytest.raises(ValueError):
        PhiSpec([0.3], [], 1.0, 0.2)
    with pytest.raises(ValueError):
        very_well_poised_spec(3, 0.2, [0.1], 0.5, 0.1)
    with pytest.raises(ValueError):
        very_well_poised_spec(3, 0.0, [0.1, 0.2, 0.3], 0.5, 0.1)


def test_unconverged_flag():
    res = phi(PhiSpec([0.9], [], 0.5, 0.99), TruncationPolicy(max_terms=5))
    assert not res.converged
