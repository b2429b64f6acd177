import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lipindex import constructions as cn
from lipindex import linop, lipop
from lipindex import spaces as sp
from lipindex.linop import LinearOperator

floats = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=64)

SPACES = [sp.lp(2, 1.0), sp.lp(3, np.inf), sp.lp(2, 2.0), sp.lp(3, 3.0), sp.regular_polygon(6),
          sp.direct_sum(sp.lp(2, 2.0), sp.real_line(), "linf"), sp.direct_sum(sp.lp(2, np.inf), sp.real_line(), "l1"),
          sp.lp(2, 2.0, sp.Field.COMPLEX), sp.lp(2, 1.0, sp.Field.COMPLEX)]
space_st = st.sampled_from(SPACES)


@st.composite
def space_and_vectors(draw, k=2):
    X = draw(space_st)
    vs = []
    for _ in range(k):
        v = np.array(draw(st.lists(floats, min_size=X.dim, max_size=X.dim)))
        if X.is_complex:
            v = v + 1j * np.array(draw(st.lists(floats, min_size=X.dim, max_size=X.dim)))
        vs.append(v)
    return X, vs


@given(space_and_vectors(), floats)
def test_norm_axioms(data, a):
    X, (x, y) = data
    nx, ny, nxy = sp.norm(X, x), sp.norm(X, y), sp.norm(X, x + y)
    assert nxy <= (nx + ny) * (1 + 1e-9) + 1e-12
    assert np.isclose(sp.norm(X, a * x), abs(a) * nx, rtol=1e-9, atol=1e-12)


@given(space_and_vectors(k=1))
def test_duality_elements(data):
    X, (x,) = data
    nx = sp.norm(X, x)
    assume(nx > 1e-6)
    f = sp.duality_set(X, x).representative()
    assert np.isclose(sp.pair(f, x), nx * nx, rtol=1e-9)
    assert np.isclose(sp.dual_norm(X, f), nx, rtol=1e-9)


@given(space_and_vectors())
def test_duality_sup_is_attained_and_bounded(data):
    X, (x, v) = data
    nx = sp.norm(X, x)
    assume(nx > 1e-6)
    D = sp.duality_set(X, x)
    val, g = D.argmax(v)
    assert np.isclose(abs(sp.pair(g, v)), val, rtol=1e-9, atol=1e-9)
    assert D.contains(g, tol=1e-8)
    assert val <= nx * sp.norm(X, v) * (1 + 1e-9) + 1e-12


@st.composite
def operators(draw, spaces=SPACES):
    X = draw(st.sampled_from(spaces))
    A = draw(hnp.arrays(np.float64, (X.dim, X.dim), elements=st.floats(-3, 3, width=64)))
    if X.is_complex:
        A = A + 1j * draw(hnp.arrays(np.float64, (X.dim, X.dim), elements=st.floats(-3, 3, width=64)))
    return LinearOperator(X, A)


FAST = [X for X in SPACES if X.kind != "sum" and not (X.kind == "pnorm" and X.p == 3.0)]


@given(operators(FAST))
def test_radius_bracket_sound(T):
    B = linop.numerical_radius(T)
    nrm = linop.op_norm(T)
    assert B.lower <= B.upper + 1e-12
    assert B.upper <= nrm * (1 + 1e-9) + 1e-9
    if T.space.is_complex:
        assert B.lower >= nrm / np.e - 1e-9
    if B.lower_witness is not None and B.lower > 0:
        assert abs(B.lower_witness.value(T) - B.lower) <= 1e-9 * max(1, B.lower)


@given(operators(FAST), st.floats(0.1, 5))
def test_radius_homogeneous(T, c):
    B1 = linop.numerical_radius(T, tol=1e-9)
    B2 = linop.numerical_radius(T.scaled(c), tol=1e-9)
    assert abs(B2.upper - c * B1.upper) <= 1e-6 * max(1, c * B1.upper)


@given(operators([sp.lp(2, 2.0), sp.lp(3, np.inf), sp.lp(2, 1.0)]))
def test_limit_raw_sequence_monotone(T):
    seq = linop.radius_upper_limit(T, 2.0 ** -np.arange(1, 25))
    assert np.all(np.diff(seq.raw) <= 1e-9 * max(1, np.abs(seq.raw).max()))
    assert np.all(np.diff(seq.bounds) <= 0)
    assert seq.final >= linop.radius_lower(T)[0] - 1e-6


@given(st.sampled_from([sp.real_line(), sp.lp(2, np.inf), sp.lp(2, 1.0), sp.lp(2, 2.0)]),
       st.integers(0, 10_000), st.integers(1, 2))
def test_random_pwl_properties(X, seed, pieces):
    T = lipop.random_pwl(X, pieces, seed)
    assert np.all(lipop.eval_pwl(T, np.zeros(X.dim)) == 0.0)
    L = lipop.lip_norm(T)
    assert lipop.lip_norm_sampled(T, budget=300, seed=seed) <= L + 1e-9
    B = lipop.lip_radius(T, budget=300, seed=seed)
    assert B.lower <= B.upper + 1e-12 <= L * (1 + 1e-9) + 1e-9


@given(st.sampled_from([sp.lp(2, 2.0), sp.lp(2, np.inf), sp.lp(2, 1.0)]),
       hnp.arrays(np.float64, (4, 2), elements=st.floats(-3, 3, width=64)), st.floats(0.2, 3))
def test_segment_extension_lipschitz(X, P, M):
    x1, x2, y1, y2 = P
    assume(sp.norm(X, x1 - x2) > 1e-3)
    gap = sp.norm(X, y1 - y2)
    if gap > 0:
        y2 = y1 + (y2 - y1) * min(1.0, M * sp.norm(X, x1 - x2) / gap)
    F = cn.segment_extension(x1, x2, y1, y2, M, X)
    np.testing.assert_array_equal(F(x1), y1)
    np.testing.assert_array_equal(F(x2), y2)
    assert F.max_quotient(pairs=200) <= M * (1 + 1e-9) + 1e-12


@given(space_and_vectors())
def test_midpoint_join_on_sphere(data):
    X, (x, y) = data
    assume(not X.is_complex and sp.norm(X, x - y) > 1e-6)
    z = cn.midpoint_join(x, y, cn.SphereSet(X))
    r = sp.norm(X, x - y)
    assert abs(sp.norm(X, z - x) - r / 2) <= 1e-9 * r
    assert abs(sp.norm(X, z - y) - r / 2) <= 1e-9 * r
