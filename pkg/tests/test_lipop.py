import numpy as np
import pytest

from lipindex import linop, lipop
from lipindex import spaces as sp
from lipindex.errors import DomainError, InputError
from lipindex.lipop import Cell, PwlOperator

R1 = sp.real_line()
LINF_2 = sp.lp(2, np.inf)
ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def test_validate_examples():
    assert lipop.validate(lipop.from_linear(LINF_2, np.array([[1.0, 2.0], [0.0, 1.0]]))).ok
    assert lipop.validate(lipop.abs_map()).ok
    bad = PwlOperator(R1, (Cell([[1.0]], [0.0], [[-1.0]], [0.0]), Cell([[-1.0]], [0.0], [[2.0]], [1.0])))
    rep = lipop.validate(bad)
    assert "continuity" in rep.kinds()
    w = [f for f in rep.failures if f.kind == "continuity"][0].witness
    assert abs(w[0]) <= 1e-9


def test_validate_detects_gap_and_overlap():
    gap = PwlOperator(R1, (Cell([[1.0]], [-0.5], [[0.0]], [0.0]), Cell([[-1.0]], [-0.5], [[0.0]], [0.0])))
    assert "coverage" in lipop.validate(gap).kinds()
    over = PwlOperator(R1, (Cell([[1.0]], [0.5], [[1.0]], [0.0]), Cell([[-1.0]], [0.5], [[1.0]], [0.0])))
    assert "overlap" in lipop.validate(over).kinds()


def test_eval_examples():
    assert lipop.eval_pwl(lipop.abs_map(), np.array([-3.0]))[0] == 3.0
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    x = np.array([0.5, -1.5])
    np.testing.assert_allclose(lipop.eval_pwl(lipop.from_linear(LINF_2, A), x), A @ x)
    for seed in range(5):
        T = lipop.random_pwl(LINF_2, 3, seed)
        assert np.all(lipop.eval_pwl(T, np.zeros(2)) == 0.0)


def test_eval_uncovered_point_raises():
    gap = PwlOperator(R1, (Cell([[1.0]], [-0.5], [[0.0]], [0.0]), Cell([[-1.0]], [-0.5], [[0.0]], [0.0])))
    with pytest.raises(DomainError):
        lipop.eval_pwl(gap, np.array([0.1]))


def test_gateaux_derivative_examples():
    D = lipop.gateaux_derivative(lipop.abs_map(), np.array([2.0]))
    np.testing.assert_array_equal(D.matrix, [[1.0]])
    assert isinstance(lipop.gateaux_derivative(lipop.abs_map(), np.array([0.0])), lipop.NonSmooth)
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    D = lipop.gateaux_derivative(lipop.from_linear(LINF_2, A), np.array([0.3, 0.1]))
    np.testing.assert_array_equal(D.matrix, A)


def test_lip_norm_examples():
    assert lipop.lip_norm(lipop.from_linear(LINF_2, np.array([[1.0, 1.0], [0.0, 0.0]]))) == 2.0
    assert lipop.lip_norm(lipop.abs_map()) == 1.0
    assert lipop.lip_norm(lipop.clamp_map(LINF_2)) == 1.0


def test_lip_norm_sampled_examples():
    A = np.array([[1.0, -2.0], [0.5, 1.0]])
    T = lipop.from_linear(LINF_2, A)
    assert abs(lipop.lip_norm_sampled(T, 0.7) - linop.op_norm(linop.LinearOperator(LINF_2, A))) <= 1e-3
    assert abs(lipop.lip_norm_sampled(lipop.abs_map(), 0.1) - 1.0) <= 1e-6


def _dense_pair_quotient(T, n=4000, seed=0):
    rng = np.random.default_rng(seed)
    R = T.box_radius
    X = rng.uniform(-R, R, (n, T.space.dim))
    Y = rng.uniform(-R, R, (n, T.space.dim))
    return np.max(sp.norm(T.space, lipop.eval_pwl(T, X) - lipop.eval_pwl(T, Y)) / sp.norm(T.space, X - Y))


@pytest.mark.parametrize("space", [R1, LINF_2, sp.lp(2, 1.0), sp.lp(2, 2.0), sp.regular_polygon(6)])
def test_lip_norm_dominates_dense_quotients(space):
    for seed in range(3):
        T = lipop.random_pwl(space, 2, seed)
        L = lipop.lip_norm(T)
        assert _dense_pair_quotient(T, seed=seed) <= L + 1e-9
        assert lipop.lip_norm_sampled(T, seed=seed) <= L + 1e-9
        assert abs(lipop.lip_norm_sampled(T, seed=seed) - L) <= 1e-3


def test_lip_radius_examples():
    B = lipop.lip_radius(lipop.from_linear(sp.lp(2, 2.0), ROT))
    assert B.lower == 0.0 and B.upper == 0.0
    B = lipop.lip_radius(lipop.abs_map())
    assert abs(B.lower - 1) <= 1e-9 and abs(B.upper - 1) <= 1e-9
    B = lipop.lip_radius(lipop.relu())
    assert abs(B.lower - 1) <= 1e-9 and abs(B.upper - 1) <= 1e-9


def test_two_point_oracle_for_abs():
    # sup (|x| - |y|)(x - y)/(x - y)^2 over a grid equals 1 (same-sign pairs)
    g = np.linspace(-2, 2, 81)
    X, Y = np.meshgrid(g, g)
    m = X != Y
    vals = (np.abs(X[m]) - np.abs(Y[m])) * (X[m] - Y[m]) / (X[m] - Y[m]) ** 2
    assert np.isclose(vals.max(), 1.0)
    assert lipop.lip_radius_sampled(lipop.abs_map())[0] <= vals.max() + 1e-12


def test_lip_radius_limit_examples():
    seq = lipop.lip_radius_limit(lipop.from_linear(LINF_2, np.eye(2)), [0.5, 0.1])
    np.testing.assert_allclose(seq.bounds, 1.0, rtol=1e-12)
    seq = lipop.lip_radius_limit(lipop.abs_map(), [1e-3])
    assert np.isclose(seq.final, 1.0, rtol=1e-9)
    t = 1e-3
    seq = lipop.lip_radius_limit(lipop.from_linear(sp.lp(2, 2.0), ROT), [t])
    assert np.isclose(seq.final, (np.sqrt(1 + t * t) - 1) / t, rtol=1e-9)


def test_random_pwl_contracts():
    assert lipop.validate(lipop.random_pwl(R1, 2, 5)).ok
    T = lipop.random_pwl(LINF_2, 4, 9)
    assert np.all(lipop.eval_pwl(T, np.zeros(2)) == 0.0)
    a, b = lipop.random_pwl(LINF_2, 2, 3), lipop.random_pwl(LINF_2, 2, 3)
    assert len(a.cells) == len(b.cells)
    for ca, cb in zip(a.cells, b.cells):
        for f in ("C", "d", "A", "b"):
            np.testing.assert_array_equal(getattr(ca, f), getattr(cb, f))
    with pytest.raises(InputError):
        lipop.random_pwl(sp.lp(2, 2.0, sp.Field.COMPLEX), 2, 0)


@pytest.mark.parametrize("space", [sp.lp(3, 1.0), sp.lp(3, np.inf), sp.lp(2, 2.0), sp.regular_polygon(6)])
def test_random_pwl_validates(space):
    for seed in range(4):
        assert lipop.validate(lipop.random_pwl(space, 2, seed)).ok


def test_cell_radius_upper_matches_two_point_lower():
    for seed in range(5):
        T = lipop.random_pwl(sp.lp(2, 2.0), 2, seed)
        B = lipop.lip_radius(T, seed=seed)
        assert B.upper - B.details["two_point_lower"] <= 1e-3
