import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qortho import expansions
from qortho.qcore import support_radius
from qortho.verification import (CHECKS, EXCLUDED, Row, SweepConfig, check_ids, interior_points, run_checks,
                                 ultraspherical_limit_error)

FAST = SweepConfig(points=2, n_max=2)


def test_registry_covers_expansions():
    ids = check_ids()
    assert set(expansions.identity_ids()) <= set(ids)
    assert ids == sorted(ids)
    for extra in ("PM", "orthogonality", "KS", "recip_ii_q1", "limit_beta"):
        assert extra in CHECKS


@given(st.sampled_from([-0.5, 0.0, 0.5, 0.9, 1]), st.integers(0, 2**32 - 1), st.booleans())
def test_interior_points(q, seed, lower):
    pts = interior_points(np.random.default_rng(seed), q, 50, 2, lower=lower)
    r = 1.0 if lower else (4.0 if q == 1 else support_radius(q))
    assert pts.shape == (50, 2)
    assert np.all(np.abs(pts) <= 0.95 * r)


def test_check_rows_independent_of_companions():
    alone = run_checks(["PM"], FAST)
    together = [r for r in run_checks(["HH", "PM"], FAST) if r.identity_id == "PM"]
    assert [r.as_record() for r in alone] == [r.as_record() for r in together]


def test_unknown_check():
    with pytest.raises(KeyError):
        run_checks(["nope"], FAST)


def test_row_records():
    r = Row("X", {"b": 1, "a": 0.5}, 1.0, 1.0, 0.0, 3, True, True)
    rec = r.as_record()
    assert rec["param_json"] == '{"a":0.5,"b":1}'
    assert rec["pass"] is True and rec["converged"] is True and rec["terms_used"] == 3
    ex = Row("X", {}, math.nan, math.nan, math.nan, 0, False, EXCLUDED)
    assert not ex.failed and ex.as_record()["pass"] == EXCLUDED
    assert Row("X", {}, 0, 0, 1, 0, True, False).failed


@pytest.mark.parametrize("iid", ["annihilation", "products", "phi_qbinomial", "rescale", "generating",
                                 "density_norm", "density_q0", "limit_q", "chapman_kolmogorov", "PM_diag",
                                 "cheb_i", "ascP_v", "bigH_corollary", "ultra_ii", "gamma_Q", "Q_symmetry", "C_n",
                                 "carlitz", "KS_finite", "recip_i", "recip_ii_q1"])
def test_checks_pass_on_small_sweeps(iid):
    rows = run_checks([iid], FAST)
    assert rows
    failed = [r for r in rows if r.failed]
    assert not failed, failed[:3]


def test_ultraspherical_limit():
    for n in (1, 4, 8):
        err, _, _ = ultraspherical_limit_error(n, 0.5)
        assert err < 1e-4
