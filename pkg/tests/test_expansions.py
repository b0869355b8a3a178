from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qortho import expansions
from qortho.poly import CoeffPoly
from qortho.qcore import support_radius

HALF = Fraction(1, 2)
IDS = expansions.identity_ids()


def test_registry_size_and_kinds():
    assert len(IDS) >= 16
    kinds = {expansions.REGISTRY[i].kind for i in IDS}
    assert kinds == {"connection", "linearization", "sum"}


def test_frozen_connection_and_linearization():
    assert expansions.connection_coeffs("PnaH", 3, q=HALF) == [Fraction(-73, 3375), Fraction(133, 450),
                                                               Fraction(-7, 30), 1]
    assert expansions.linearize("HH", (2, 3), q=HALF) == CoeffPoly([0, Fraction(21, 8), 0, Fraction(21, 8), 0, 1])


@pytest.mark.parametrize("iid", IDS)
def test_exact_identity_small_indices(iid):
    # the full index grid <= 8 runs in the acceptance suite
    for q in (Fraction(1, 4), Fraction(3, 4)):
        for rep in expansions.verify_exact_sweep(iid, 3, q=q):
            assert rep.exact, (iid, rep.parameters, rep.residual)


@pytest.mark.parametrize("iid", IDS)
@settings(max_examples=15)
@given(u=st.floats(-0.95, 0.95), q=st.sampled_from([-0.5, 0.3, 0.9]), n=st.integers(0, 12))
def test_float_identity(iid, u, q, n):
    info = expansions.REGISTRY[iid]
    x = u if info.variable == "u" else u * support_radius(q)
    idx = (n,) + (min(n, 12 - n if info.arity == 3 else n),) * (info.arity - 1)
    idx = tuple(min(i, 6) for i in idx) if info.arity == 3 else idx
    rep = expansions.verify_point(iid, idx, None, q, x)
    assert rep.residual < 1e-9, (iid, idx, q, x, rep.lhs, rep.rhs)


@given(st.integers(0, 8), st.integers(0, 8))
def test_annihilation_exact(n, m):
    for x in (Fraction(1, 3), Fraction(-5, 4)):
        assert expansions.annihilation_sum(n, m, HALF, x) == expansions.annihilation_closed_form(n, m, HALF, x)


def test_annihilation_vanishes_above_m():
    assert expansions.annihilation_sum(5, 2, HALF, Fraction(2, 3)) == 0
    with pytest.raises(ValueError):
        expansions.annihilation_sum(-1, 2, HALF, 0.3)


def test_parameter_and_index_validation():
    with pytest.raises(KeyError):
        expansions.verify_exact("nope", 1)
    with pytest.raises(ValueError):
        expansions.verify_exact("HH", (1,))
    with pytest.raises(ValueError):
        expansions.verify_exact("PnaH", 2, {"zzz": 1})
    with pytest.raises(ValueError):
        expansions.verify_exact("HH", (-1, 2))
    with pytest.raises(ValueError):
        expansions.linearize("PnaH", 2)
    with pytest.raises(ValueError):
        expansions.verify_exact("HnaT", 2, q=1)


def test_custom_parameters_exact():
    rep = expansions.verify_exact("PnaP", 4, {"y": Fraction(1, 5), "z": Fraction(2, 3), "rho": Fraction(-1, 3),
                                              "r": Fraction(1, 2)}, HALF)
    assert rep.exact


def test_apply_connection_matches_lhs():
    for iid in ("PnaH", "bigH", "RnaH", "BnaH"):
        assert abs(expansions.apply_connection(iid, 5, q=0.3, x=0.7)
                   - expansions.lhs_value(iid, 5, q=0.3, x=0.7)) < 1e-10
