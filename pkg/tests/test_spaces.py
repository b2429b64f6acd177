import itertools

import numpy as np
import pytest

from lipindex import spaces as sp
from lipindex.errors import DomainError, InputError

L1_2, LINF_2, L2_2 = sp.lp(2, 1.0), sp.lp(2, np.inf), sp.lp(2, 2.0)


@pytest.mark.parametrize("space, x, expected", [
    (sp.lp(3, np.inf), [1, -2, 0.5], 2.0),
    (L1_2, [3, -4], 7.0),
    (L2_2, [3, 4], 5.0),
])
def test_norm_examples(space, x, expected):
    assert sp.norm(space, np.array(x, float)) == expected


@pytest.mark.parametrize("space, f, expected", [
    (L1_2, [3, -3], 3.0),
    (LINF_2, [1, 1], 2.0),
    (L2_2, [3, 4], 5.0),
])
def test_dual_norm_examples(space, f, expected):
    assert sp.dual_norm(space, np.array(f, float)) == expected


def test_dual_norm_matches_sup_over_ball_vertices():
    H = sp.regular_polygon(6)
    rng = np.random.default_rng(0)
    for f in rng.standard_normal((20, 2)):
        assert np.isclose(sp.dual_norm(H, f), np.max(np.abs(H.vertices @ f)), rtol=1e-12)


@pytest.mark.parametrize("space, x, expected", [
    (LINF_2, [2, 1], [2, 0]),
    (L1_2, [1, -2], [3, -3]),
    (L2_2, [3, 4], [3, 4]),
])
def test_duality_set_singletons(space, x, expected):
    D = sp.duality_set(space, np.array(x, float))
    np.testing.assert_allclose(D.representative(), expected)
    assert D.contains(np.array(expected, float))


def test_duality_set_rejects_zero():
    with pytest.raises(DomainError):
        sp.duality_set(L2_2, np.zeros(2))


@pytest.mark.parametrize("space, x, v, expected", [
    (LINF_2, [1, 1], [1, -1], 1.0),
    (L1_2, [1, 0], [0, 2], 2.0),
    (L1_2, [1, -2], [1, 1], 0.0),
])
def test_duality_sup_abs_examples(space, x, v, expected):
    D = sp.duality_set(space, np.array(x, float))
    assert np.isclose(sp.duality_sup_abs(D, np.array(v, float)), expected)


def _face_brute(space, x, v):
    # enumerate dual extreme points attaining the norm at x
    G = sp.dual_ball_extreme_points(space)
    nx = sp.norm(space, x)
    att = G[np.abs(G @ x - nx) <= 1e-12 * max(1, nx)]
    return nx * np.max(np.abs(att @ v))


@pytest.mark.parametrize("space", [sp.lp(3, 1.0), sp.lp(3, np.inf), sp.regular_polygon(6),
                                   sp.direct_sum(sp.lp(2, 1.0), sp.lp(1, 2.0), "linf"),
                                   sp.direct_sum(sp.lp(2, np.inf), sp.lp(2, 1.0), "l1")])
def test_duality_sup_matches_vertex_enumeration(space):
    rng = np.random.default_rng(1)
    # integer points hit ties and zero coordinates, where faces are not singletons
    pts = list(rng.integers(-2, 3, (40, space.dim)).astype(float))
    if space.kind == "poly":
        pts = list(space.vertices) + list(rng.standard_normal((10, 2)))
    for x in pts:
        if not np.any(x):
            continue
        v = rng.standard_normal(space.dim)
        D = sp.duality_set(space, x)
        assert np.isclose(sp.duality_sup_abs(D, v), _face_brute(space, x, v), rtol=1e-10, atol=1e-12)


def test_face_sup_batch_agrees_with_single():
    rng = np.random.default_rng(2)
    for space in [sp.lp(3, 1.0), sp.lp(2, 3.0), sp.lp(2, np.inf, sp.Field.COMPLEX),
                  sp.direct_sum(sp.lp(2, 2.0), sp.real_line(), "l1")]:
        Z = sp.sample_sphere(space, 30, 3) * 2.0
        V = rng.standard_normal((30, space.dim)).astype(space.field.dtype)
        batch = sp.face_sup_batch(space, Z, V)
        single = [sp.duality_set(space, z).sup_abs(v) / sp.norm(space, z) for z, v in zip(Z, V)]
        np.testing.assert_allclose(batch, single, rtol=1e-12, atol=1e-14)


def test_ball_extreme_points():
    pts = {tuple(p) for p in sp.ball_extreme_points(L1_2)}
    assert pts == {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}
    assert {tuple(p) for p in sp.ball_extreme_points(LINF_2)} == set(itertools.product([1.0, -1.0], repeat=2))
    R1R = sp.direct_sum(sp.real_line(), sp.real_line(), "l1")
    assert {tuple(p) for p in sp.ball_extreme_points(R1R)} == pts


def test_sample_sphere_contract():
    x = sp.sample_sphere(L2_2, 1, 7)[0]
    assert np.isclose(sp.norm(L2_2, x), 1.0)
    a = sp.sample_sphere(sp.lp(3, np.inf), 10, 1)
    np.testing.assert_array_equal(a, sp.sample_sphere(sp.lp(3, np.inf), 10, 1))
    n = sp.norm(L1_2, sp.sample_sphere(L1_2, 1000, 3))
    assert np.all(np.abs(n - 1) <= 1e-12)


def test_sum_dimension_and_norm():
    Z = sp.direct_sum(sp.lp(2, 2.0), sp.lp(3, 1.0), "linf")
    assert Z.dim == 5
    x = np.array([3.0, 4.0, 1.0, -1.0, 2.0])
    assert sp.norm(Z, x) == 5.0
    Z1 = sp.direct_sum(sp.lp(2, 2.0), sp.lp(3, 1.0), "l1")
    assert sp.norm(Z1, x) == 9.0


def test_polyhedral_validation():
    with pytest.raises(InputError):
        sp.polyhedral([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])  # not symmetric
    H = sp.regular_polygon(6)
    assert np.allclose(sp.norm(H, H.vertices), 1.0)


def test_complex_modulus_multiplicative():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    b = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    np.testing.assert_allclose(np.abs(a * b), np.abs(a) * np.abs(b), rtol=1e-14)
    np.testing.assert_allclose((a * b) * a, a * (b * a), rtol=1e-14)


def test_norm_increment_stable():
    X = sp.lp(3, 2.0)
    z = np.array([1.0, 0.0, 0.0])
    w = np.array([0.3, -0.2, 0.5])
    t = 1e-9
    # exact value of (||z + t w|| - ||z||)/t via the conjugate formula
    exact = (2 * w[0] + t * (w @ w)) / (np.sqrt(1 + 2 * t * w[0] + t * t * (w @ w)) + 1)
    assert np.isclose(sp.norm_increment(X, z, w, t) / t, exact, rtol=1e-12)
