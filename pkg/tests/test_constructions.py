import numpy as np
import pytest

from lipindex import constructions as cn
from lipindex import lipop
from lipindex import spaces as sp
from lipindex.errors import GenerationError, InputError, NotFoundError
from lipindex.linop import LinearOperator, numerical_radius

L2_2, LINF_2 = sp.lp(2, 2.0), sp.lp(2, np.inf)
E1 = np.array([1.0, 0.0])
R = sp.real_line()


def test_mcshane_examples():
    f = cn.mcshane_extend(np.zeros(2), E1, L2_2)
    assert f(np.array([2.0, 0.0])) == pytest.approx(2.0, abs=1e-9)
    for s in np.linspace(0, 1, 11):
        assert f(s * E1) == pytest.approx(s, abs=1e-9)
    assert f.max_quotient(pairs=2000) <= 1 + 1e-9


def test_mcshane_against_grid_minimum():
    X = sp.lp(2, 3.0)
    x1, x2 = np.array([0.3, -1.0]), np.array([1.0, 0.5])
    f = cn.mcshane_extend(x1, x2, X)
    a = sp.norm(X, x2 - x1)
    ts = np.linspace(0, 1, 20001)
    rng = np.random.default_rng(0)
    for x in rng.standard_normal((10, 2)):
        grid = np.min(ts * a + sp.norm(X, x - x1 - ts[:, None] * (x2 - x1)))
        assert f(x) <= grid + 1e-12 and f(x) >= grid - 1e-6


def test_segment_extension_examples():
    y1, y2 = np.zeros(2), np.array([0.0, 1.0])
    F = cn.segment_extension(np.zeros(2), E1, y1, y2, 1.0, L2_2)
    np.testing.assert_array_equal(F(np.zeros(2)), y1)
    np.testing.assert_array_equal(F(E1), y2)
    np.testing.assert_allclose(F(np.array([2.0, 0.0])), [0.0, 1.0], atol=1e-9)


def test_segment_extension_hypothesis_check():
    with pytest.raises(InputError, match="hypothesis"):
        cn.segment_extension(np.zeros(2), E1, np.zeros(2), np.array([0.0, 3.0]), 1.0, L2_2)


def test_midpoint_join_examples():
    x, y = np.array([1.0, 1.0]), np.array([-1.0, -1.0])
    z = cn.midpoint_join(x, y, cn.SphereSet(LINF_2))
    np.testing.assert_array_equal(z, [0.0, 0.0])
    assert sp.norm(LINF_2, y - z) == 1.0
    rng = np.random.default_rng(0)
    for X in (L2_2, sp.lp(3, 1.0), sp.regular_polygon(6)):
        for _ in range(10):
            x, y = rng.standard_normal((2, X.dim))
            z = cn.midpoint_join(x, y, cn.SphereSet(X))
            r = sp.norm(X, x - y)
            assert abs(sp.norm(X, z - x) - r / 2) <= 1e-12 * max(1, r)
            assert abs(sp.norm(X, z - y) - r / 2) <= 1e-12 * max(1, r)


def test_midpoint_join_product_and_vertex_sets():
    Z = sp.direct_sum(L2_2, R, "linf")
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = rng.standard_normal((2, 3))
        z = cn.midpoint_join(x, y, cn.ProductSet(Z))
        r = sp.norm(Z, x - y)
        # z - x lies in (r/2)(-S_X x B_Y) and the far endpoint is within r/2
        assert abs(sp.norm(L2_2, (x - z)[:2]) - r / 2) <= 1e-12 * max(1, r)
        assert sp.norm(Z, y - z) <= r / 2 * (1 + 1e-12)
    V = cn.VertexSet(LINF_2, sp.ball_extreme_points(LINF_2))
    z = cn.midpoint_join(np.array([1.0, 0.0]), np.array([-1.0, 0.0]), V, 1e-6)
    assert sp.norm(LINF_2, z - np.array([-1.0, 0.0])) <= 1 + 1e-9
    with pytest.raises(NotFoundError):
        cn.midpoint_join(np.array([1.0, 0.0]), np.array([-1.0, 0.0]),
                         cn.VertexSet(LINF_2, np.array([[0.0, 1.0]])), 1e-3)


def test_lush_witness_examples():
    w = cn.lush_witness(LINF_2, np.array([1.0, -1.0]), np.array([1.0, 1.0]), 0.1)
    assert isinstance(w, cn.LushWitness)
    np.testing.assert_allclose(w.ystar, [1.0, 0.0])
    assert w.achieved_distance <= 1e-12
    x = np.array([-1.0, 0.5])
    w = cn.lush_witness(LINF_2, x, np.array([1.0, 1.0]), 0.1)
    assert isinstance(w, cn.LushWitness) and w.achieved_distance <= 1e-12
    assert -1.0 in w.alphas
    assert all(v > 0 for v in w.verify(LINF_2, x, np.array([1.0, 1.0])).values())


def test_lush_witness_not_found_on_euclidean_plane():
    w = cn.lush_witness(L2_2, np.array([0.0, 1.0]), np.array([1.0, 0.0]), 0.1)
    assert isinstance(w, cn.NotFound)
    assert w.best_distance > 0.1
    # oracle: over a dense grid of functionals, the slice convex hull stays far from x
    th = np.linspace(-np.pi, np.pi, 3601)
    for a in th[np.cos(th) > 0.9]:
        ystar = np.array([np.cos(a), np.sin(a)])
        phi = np.linspace(-np.pi, np.pi, 3601)
        cap = np.column_stack([np.cos(phi), np.sin(phi)])
        cap = cap[cap @ ystar > 0.9]
        # distance from x to conv(cap u -cap) >= 1 - max |<cap, x>|
        assert 1 - np.max(np.abs(cap @ np.array([0.0, 1.0]))) > 0.1


def test_lush_witness_on_l1_spaces_always_found():
    X = sp.lp(3, 1.0)
    rng = np.random.default_rng(3)
    for x, y in zip(sp.sample_sphere(X, 10, 1), sp.sample_sphere(X, 10, 2)):
        w = cn.lush_witness(X, x, y, 0.05)
        assert isinstance(w, cn.LushWitness)
        assert all(v > 0 for v in w.verify(X, x, y).values())


def test_ck_witness_boost_example():
    T = LinearOperator(LINF_2, np.array([[1.0, 1.0], [0.0, 0.0]]))
    z, s, g, val = cn.ck_witness_boost(LINF_2, T, np.array([1.0, 1.0]), np.array([-1.0, -1.0]), 0.01)
    assert s == 0
    np.testing.assert_array_equal(z, [0.0, 0.0])
    assert val == 2.0
    # g lies in D(v) for v = (z - x)/||z - x||
    v = (z - np.array([1.0, 1.0])) / sp.norm(LINF_2, z - np.array([1.0, 1.0]))
    assert sp.duality_set(LINF_2, v).contains(g)


def test_ck_witness_boost_rejects_bad_pair():
    T = LinearOperator(LINF_2, np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InputError):
        cn.ck_witness_boost(LINF_2, T, np.array([1.0, -1.0]), np.array([0.0, 0.0]), 0.01)


def test_ck_witness_boost_on_pwl():
    X = sp.lp(3, np.inf)
    for seed in range(5):
        T = lipop.random_pwl(X, 2, seed)
        L = lipop.lip_norm(T)
        centers, radii = T.centers
        k = int(np.argmax([np.abs(c.A).sum(1).max() for c in T.cells]))
        A = T.cells[k].A
        i = int(np.argmax(np.abs(A).sum(1)))
        d = np.sign(A[i])
        d[d == 0] = 1.0
        x = centers[k] + 0.4 * radii[k] * d / np.sqrt(3)
        y = centers[k] - 0.4 * radii[k] * d / np.sqrt(3)
        z, s, g, val = cn.ck_witness_boost(X, T, x, y, 0.01)
        assert val > (1 - 0.02) * L - 1e-9
        assert abs(sp.norm(X, z - y) - sp.norm(X, x - y) / 2) <= 1e-9


def test_linf_witness_align_examples():
    Z = sp.direct_sum(R, R, "linf")
    T = LinearOperator(Z, np.array([[0.0, 1.0], [0.0, 0.0]]))
    u, v = cn.linf_witness_align(T, 1e-3)
    assert abs(sp.norm(Z, u - v) - abs(u[0] - v[0])) <= 1e-9
    assert sp.norm(Z, T(u) - T(v)) >= (1 - 1e-3) * sp.norm(Z, u - v)
    Z2 = sp.direct_sum(L2_2, R, "linf")
    Rot = np.zeros((3, 3))
    Rot[:2, :2] = [[0.0, -1.0], [1.0, 0.0]]
    T = LinearOperator(Z2, Rot)
    u, v = cn.linf_witness_align(T, 1e-3)
    assert abs(sp.norm(Z2, T(u) - T(v)) / sp.norm(Z2, u - v) - 1.0) <= 1e-9


def test_linf_sum_compress_example():
    Z = sp.direct_sum(R, R, "linf")
    T = LinearOperator(Z, np.array([[0.0, 1.0], [0.0, 0.0]]))
    S = cn.linf_sum_compress(T, np.array([1.0, 1.0]), np.array([-1.0, -1.0]))
    xs = np.linspace(-1, 1, 9)
    np.testing.assert_allclose([S(np.array([x]))[0] for x in xs], xs, atol=1e-9)
    assert S(np.array([-5.0]))[0] == pytest.approx(-1.0, abs=1e-9)
    assert cn.callable_lip_sampled(S) <= 1 + 1e-9
    assert abs(cn.callable_radius_sampled(S) - 1.0) <= 1e-6
    B = numerical_radius(T)
    assert cn.callable_radius_sampled(S) <= B.upper + 1e-9


def test_linf_sum_compress_identity_block():
    Z = sp.direct_sum(L2_2, R, "linf")
    A = np.zeros((3, 3))
    A[:2, :2] = np.eye(2)
    T = LinearOperator(Z, A)
    u, v = cn.linf_witness_align(T, 1e-3)
    S = cn.linf_sum_compress(T, u, v)
    x = np.array([0.3, -0.7])
    np.testing.assert_allclose(S(x) - S(np.zeros(2)), x, atol=1e-12)
    assert abs(cn.callable_radius_sampled(S) - 1.0) <= 1e-9


def test_linf_sum_compress_preconditions():
    Z = sp.direct_sum(R, R, "linf")
    T = LinearOperator(Z, np.eye(2))
    with pytest.raises(InputError):
        cn.linf_sum_compress(T, np.array([0.0, 2.0]), np.array([0.1, -2.0]))


def test_l1_sum_compress_examples():
    Z = sp.direct_sum(R, R, "l1")
    T = LinearOperator(Z, np.array([[1.0, 0.0], [0.0, 0.0]]))
    S, side = cn.l1_sum_compress(T, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.01)
    assert side == "left"
    for x in (-2.0, 0.5, 3.0):
        assert S(np.array([x]))[0] == pytest.approx(x)
    assert abs(cn.callable_radius_sampled(S) - 1.0) <= 1e-9


def test_l1_sum_compress_random_never_increases_radius():
    Z = sp.direct_sum(R, R, "l1")
    rng = np.random.default_rng(0)
    for k in range(30):
        T = LinearOperator(Z, rng.standard_normal((2, 2)))
        V = sp.ball_extreme_points(Z)
        z1 = V[int(np.argmax(sp.norm(Z, V @ T.matrix.T)))]
        S, side = cn.l1_sum_compress(T, z1, np.zeros(2), 0.01)
        # the summand components of the witness pair keep (1 - eps) of the Lipschitz constant
        k = 0 if side == "left" else 1
        p1, p2 = z1[k:k + 1], np.zeros(1)
        gap = sp.norm(R, S(p1) - S(p2))
        assert gap >= (1 - 0.01) * cn.lip_constant(T) * sp.norm(R, p1 - p2) - 1e-9
        assert cn.callable_radius_sampled(S, seed=k) <= numerical_radius(T).upper + 1e-6


def test_l1_sum_compress_rejects_bad_witness():
    Z = sp.direct_sum(R, R, "l1")
    T = LinearOperator(Z, np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(InputError):
        cn.l1_sum_compress(T, np.array([0.0, 1.0]), np.array([0.0, -1.0]), 0.01)


@pytest.mark.parametrize("S, n", [(lipop.from_linear(R, np.eye(1)), 2), (lipop.from_linear(R, -np.eye(1)), 3),
                                  (lipop.abs_map(), 2)])
def test_diagonal_lift_examples(S, n):
    T = cn.diagonal_lift(S, n)
    assert T.space.dim == n
    assert lipop.validate(T).ok
    assert lipop.lip_norm(T) == lipop.lip_norm(S)
    B = lipop.lip_radius(T)
    assert B.lower - 1e-6 <= 1.0 <= B.upper + 1e-6


def test_diagonal_lift_cell_limit():
    with pytest.raises(GenerationError):
        cn.diagonal_lift(lipop.clamp_map(LINF_2), 4, max_cells=100)
    with pytest.raises(InputError):
        cn.diagonal_lift(lipop.abs_map(), 0)
