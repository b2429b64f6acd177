import numpy as np
import pytest

from lipindex import index as ix
from lipindex import spaces as sp
from lipindex.errors import InputError
from lipindex.linop import LinearOperator

L2_2 = sp.lp(2, 2.0)
CL2_2 = sp.lp(2, 2.0, sp.Field.COMPLEX)


def test_real_hilbert_index_is_zero():
    e = ix.estimate_index(L2_2, ix.LINEAR, 2000, seed=7)
    assert e.upper <= 5e-3
    # the witness is skew up to scaling: a quarter turn
    A = e.witness.matrix
    assert np.allclose(A + A.T, 0, atol=1e-9)


def test_complex_hilbert_index_is_half():
    e = ix.estimate_index(CL2_2, ix.LINEAR, 2000, seed=7)
    assert abs(e.upper - 0.5) <= 5e-3
    # nilpotent witness: A^2 = 0
    A = e.witness.matrix
    assert np.allclose(A @ A, 0, atol=1e-9)


def test_linf_index_is_one():
    e = ix.estimate_index(sp.lp(2, np.inf), ix.LINEAR, 10_000, seed=0)
    assert e.upper >= 1 - 5e-3


def test_estimates_in_range_and_reproducible():
    for X in (sp.lp(2, 3.0), sp.regular_polygon(6), sp.lp(2, 1.0, sp.Field.COMPLEX)):
        e = ix.estimate_index(X, ix.LINEAR, 300, seed=1)
        lo = ix.INV_E - 1e-6 if X.is_complex else 0.0
        assert lo <= e.upper <= 1.0 + 1e-9
        assert abs(e.reevaluate() - e.upper) <= 1e-6


def test_deterministic_given_seed():
    a = ix.estimate_index(sp.lp(2, 3.0), ix.LINEAR, 200, seed=3)
    b = ix.estimate_index(sp.lp(2, 3.0), ix.LINEAR, 200, seed=3)
    assert a.upper == b.upper
    np.testing.assert_array_equal(a.witness.matrix, b.witness.matrix)


def test_lipschitz_mode_not_above_linear():
    for X in (sp.lp(2, np.inf), sp.regular_polygon(6), L2_2):
        lin = ix.estimate_index(X, ix.LINEAR, 500, seed=2)
        lip = ix.estimate_index(X, ix.LIPSCHITZ, 500, seed=2)
        assert lip.upper <= lin.upper + 1e-9


def test_bad_arguments():
    with pytest.raises(InputError):
        ix.estimate_index(L2_2, ix.LINEAR, 0)
    with pytest.raises(InputError):
        ix.estimate_index(L2_2, "other", 10)
    with pytest.raises(InputError):
        ix.bk_suite(L2_2, 5)


def test_battery_contents():
    names = [n for n, _ in ix.battery(L2_2)]
    assert {"shift", "rotation", "rank-one", "sign-2"} <= set(names)
    Z = sp.direct_sum(L2_2, sp.real_line(), "linf")
    assert "left:rotation" in [n for n, _ in ix.battery(Z)]


def test_surrogate_exact_on_polyhedral():
    X = sp.lp(3, 1.0)
    sur = ix._Surrogate(X)
    rng = np.random.default_rng(0)
    Ms = rng.standard_normal((50, 3, 3))
    vals = sur(Ms)
    np.testing.assert_allclose(vals, 1.0, rtol=1e-12)


def test_bk_suite_reports():
    R = ix.bk_suite(CL2_2, 30, 1)
    assert R.ok and len(R.cases) == 30
    body = ix.report_to_json(R)
    assert body["suite"] == "bk" and all(c["witness"] is not None for c in body["cases"])
    # worst linear case on complex l2 keeps a margin of about 1/2 - 1/e
    margins = [c.value / (c.expected * np.e) for c in R.cases]
    assert min(margins) >= 0.5 - 1e-6


def test_known_values_suite():
    R = ix.known_values_suite(1, dims=(2, 3), random_ops=5)
    assert R.ok
    names = {c.name for c in R.cases}
    assert {"l2:2:battery-min", "cl2:2:battery-min", "linf:3:battery-min"} <= names


def test_ck_suite():
    R = ix.ck_suite(3, 20, 1e-2, 0)
    assert R.ok and len(R.cases) == 20


def test_sum_stability_suite_small():
    R = ix.sum_stability_suite(sp.real_line(), sp.real_line(), "l1", 500, 0)
    assert R.ok
    with pytest.raises(InputError):
        ix.sum_stability_suite(sp.lp(3, 2.0), sp.lp(3, 2.0), "l1", 10, 0)


def test_rnp_suite_small():
    R = ix.rnp_equality_suite(sp.lp(2, np.inf), 300, 0, cpwl_checks=2)
    assert R.ok


def test_report_csv():
    R = ix.ck_suite(2, 3, 1e-2, 0)
    text = ix.report_to_csv(R)
    lines = text.strip().splitlines()
    assert lines[0].startswith("suite,seed,name,status")
    assert len(lines) == 4


def test_check_relations():
    assert ix.check("a", 1.0, 1.0, 0.0).status == "pass"
    assert ix.check("a", 0.9, 1.0, 0.05, "ge").status == "fail"
    assert ix.check("a", 0.9, 1.0, 0.05, "ge", converged=False).status == "unconverged"
    assert ix.check("a", 0.9, 1.0, 0.0, "le").status == "pass"


def test_daugavet_check_pins():
    gap, pinned, _ = ix.daugavet_check(LinearOperator(sp.lp(2, np.inf), np.array([[1.0, 1.0], [0.0, 0.0]])))
    assert pinned and abs(gap) <= 1e-6
    gap, pinned, _ = ix.daugavet_check(LinearOperator(L2_2, np.array([[0.0, -1.0], [1.0, 0.0]])))
    assert not pinned and gap >= 1e-3
