"""Finite-dimensional normed spaces, their duals and duality mappings.

Vectors are numpy arrays whose last axis has length ``space.dim``; most
functions here accept a batch of vectors stacked along leading axes. Complex
spaces use numpy complex dtype. Functionals act through the bilinear pairing
``f(x) = sum_i f_i x_i``; with this convention the duality element of a
complex vector carries conjugated phases so that ``f(x) = ||x||**2`` is real.
"""

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InputError, UnsupportedKindError

#: relative tolerance used to decide which coordinates/facets attain a norm
ATTAIN_RTOL = 1e-12


class Field(enum.Enum):
    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self):
        return np.float64 if self is Field.REAL else np.complex128


@dataclass(frozen=True, eq=False)
class NormedSpace:
    """A finite-dimensional real or complex normed space.

    Build instances through :func:`lp`, :func:`polyhedral` or
    :func:`direct_sum` rather than directly.
    """

    dim: int
    field: Field
    kind: str  # "pnorm" | "poly" | "sum"
    p: float = 2.0
    vertices: Optional[np.ndarray] = None
    facets: Optional[np.ndarray] = None
    left: Optional["NormedSpace"] = None
    right: Optional["NormedSpace"] = None
    sum_kind: Optional[str] = None  # "l1" | "linf"
    source: Optional[str] = None

    @property
    def is_complex(self):
        return self.field is Field.COMPLEX

    @property
    def spec(self):
        """Space-spec string in the mini-language understood by ``io.parse_space``."""
        if self.kind == "pnorm":
            prefix = "c" if self.is_complex else ""
            return f"{prefix}{_p_label(self.p)}:{self.dim}"
        if self.kind == "poly":
            return f"poly:{self.source}" if self.source else f"poly:<{len(self.vertices)} vertices>"
        return f"sum:{self.sum_kind}({self.left.spec},{self.right.spec})"

    def split(self, x):
        """Split a vector of a sum space into its two components."""
        if self.kind != "sum":
            raise UnsupportedKindError(f"{self.spec} is not a sum space")
        d = self.left.dim
        return x[..., :d], x[..., d:]

    def same_as(self, other):
        if self is other:
            return True
        if self.spec != other.spec or self.kind != other.kind:
            return False
        if self.kind == "poly":
            return (np.array_equal(self.vertices, other.vertices)
                    and np.array_equal(self.facets, other.facets))
        if self.kind == "sum":
            return self.left.same_as(other.left) and self.right.same_as(other.right)
        return True

    def __repr__(self):
        return f"NormedSpace({self.spec!r})"


def _p_label(p):
    if np.isinf(p):
        return "linf"
    if float(p).is_integer():
        return f"l{int(p)}"
    return f"l{p:g}"


# ---------------------------------------------------------------------------
# constructors


def lp(n, p=2.0, field=Field.REAL):
    """The space K^n with the p-norm, ``1 <= p <= inf``."""
    if int(n) != n or n < 1:
        raise InputError(f"dimension must be a positive integer, got {n!r}")
    p = float(p)
    if not p >= 1.0:
        raise InputError(f"p must lie in [1, inf], got {p}")
    if isinstance(field, str):
        field = Field(field)
    return NormedSpace(dim=int(n), field=field, kind="pnorm", p=p)


def real_line():
    return lp(1, 2.0)


def polyhedral(vertices, facets=None, source=None):
    """Real space whose unit ball is the symmetric polytope with the given vertices.

    ``facets`` are functionals phi_j with ``||x|| = max_j |phi_j(x)|``; they are
    derived from the convex hull when omitted.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    if not np.all(np.isfinite(V)):
        raise InputError("polyhedral vertices must be finite")
    if facets is None:
        F = _facets_from_vertices(V)
    else:
        F = np.atleast_2d(np.asarray(facets, dtype=float))
    n = V.shape[1]
    if F.shape[1] != n:
        raise InputError(f"facets have dimension {F.shape[1]}, vertices {n}")
    _validate_polytope(V, F)
    V.setflags(write=False)
    F.setflags(write=False)
    return NormedSpace(dim=n, field=Field.REAL, kind="poly", vertices=V,
                       facets=F, source=source)


def _facets_from_vertices(V):
    n = V.shape[1]
    if n == 1:
        return np.array([[1.0 / np.max(np.abs(V))]])
    from scipy.spatial import ConvexHull

    hull = ConvexHull(np.vstack([V, -V]))
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    F = normals / (-offsets)[:, None]
    keep = []
    for row in F:
        if not any(np.allclose(row, k, atol=1e-10) or np.allclose(row, -k, atol=1e-10)
                   for k in keep):
            keep.append(row)
    F = np.array(keep)
    F[np.abs(F) < 1e-14] = 0.0
    return F


def _validate_polytope(V, F, tol=1e-9):
    for v in V:
        if not np.any(np.all(np.abs(V + v) <= tol, axis=1)):
            raise InputError(f"vertex list is not symmetric: -{v.tolist()} missing")
    vals = np.max(np.abs(V @ F.T), axis=1)
    bad = np.flatnonzero(np.abs(vals - 1.0) > tol)
    if bad.size:
        raise InputError(f"vertex {V[bad[0]].tolist()} has facet norm {vals[bad[0]]!r}, expected 1")
    if np.linalg.matrix_rank(F) < V.shape[1]:
        raise InputError("facet functionals do not span the dual space")
    dual = np.max(np.abs(F @ V.T), axis=1)
    bad = np.flatnonzero(np.abs(dual - 1.0) > tol)
    if bad.size:
        raise InputError(f"facet {F[bad[0]].tolist()} is not supporting (dual norm {dual[bad[0]]!r})")


def regular_polygon(n_vertices=6):
    """Planar polyhedral space whose unit ball is a regular polygon."""
    if n_vertices % 2 or n_vertices < 4:
        raise InputError("a symmetric polygon needs an even number >= 4 of vertices")
    ang = 2 * np.pi * np.arange(n_vertices) / n_vertices
    V = np.column_stack([np.cos(ang), np.sin(ang)])
    V[np.abs(V) < 1e-15] = 0.0
    return polyhedral(V, source=f"regular-{n_vertices}-gon")


def random_polygon(n_vertices=6, seed=0):
    """Random symmetric convex polygon norm with exactly ``n_vertices`` vertices."""
    from scipy.spatial import ConvexHull

    rng = np.random.default_rng(seed)
    half = n_vertices // 2
    for _ in range(1000):
        ang = np.sort(rng.uniform(0, np.pi, half))
        rad = rng.uniform(0.6, 1.4, half)
        P = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        P = np.vstack([P, -P])
        hull = ConvexHull(P)
        if len(hull.vertices) == n_vertices:
            gaps = np.diff(np.concatenate([ang, [ang[0] + np.pi]]))
            if gaps.min() > 0.15:
                return polyhedral(P[hull.vertices], source=f"random-{n_vertices}-gon-seed{seed}")
    raise InputError("could not generate a random polygon")  # pragma: no cover


def direct_sum(left, right, kind="linf"):
    """The l1- or l_inf-sum of two spaces over the same field."""
    kind = {"1": "l1", "l1": "l1", "inf": "linf", "linf": "linf"}.get(str(kind))
    if kind is None:
        raise InputError("sum kind must be 'l1' or 'linf'")
    if left.field is not right.field:
        raise InputError("summands must share the base field")
    return NormedSpace(dim=left.dim + right.dim, field=left.field, kind="sum",
                       left=left, right=right, sum_kind=kind)


def power(space, n, kind="l1"):
    """``space`` summed with itself ``n`` times (left-nested)."""
    if n < 1:
        raise InputError("n must be >= 1")
    out = space
    for _ in range(n - 1):
        out = direct_sum(out, space, kind)
    return out


def blocks(space):
    """Leaf summands of a (possibly nested) sum, left to right."""
    if space.kind != "sum":
        return [space]
    return blocks(space.left) + blocks(space.right)


# ---------------------------------------------------------------------------
# norms


def _check_vector(space, x, name="x"):
    x = np.asarray(x)
    if x.shape[-1:] != (space.dim,):
        raise InputError(f"{name} has length {x.shape[-1] if x.ndim else 0}, space dimension is {space.dim}")
    if space.is_complex:
        return x.astype(complex)
    if np.iscomplexobj(x):
        if np.any(np.imag(x) != 0):
            raise InputError(f"{name} has complex entries but the space is real")
        x = np.real(x)
    return x.astype(float)


def _pnorm_abs(a, p):
    if p == 1.0:
        return np.sum(a, axis=-1)
    if p == 2.0:
        return np.sqrt(np.sum(a * a, axis=-1))
    if np.isinf(p):
        return np.max(a, axis=-1)
    m = np.max(a, axis=-1)
    safe = np.where(m > 0, m, 1.0)
    return m * np.sum((a / safe[..., None]) ** p, axis=-1) ** (1.0 / p)


def _conj_exp(p):
    if p == 1.0:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _norm(space, x):
    if space.kind == "pnorm":
        return _pnorm_abs(np.abs(x), space.p)
    if space.kind == "poly":
        return np.max(np.abs(x @ space.facets.T), axis=-1)
    a, b = space.split(x)
    na, nb = _norm(space.left, a), _norm(space.right, b)
    return na + nb if space.sum_kind == "l1" else np.maximum(na, nb)


def _dual_norm(space, f):
    if space.kind == "pnorm":
        return _pnorm_abs(np.abs(f), _conj_exp(space.p))
    if space.kind == "poly":
        return np.max(np.abs(f @ space.vertices.T), axis=-1)
    a, b = space.split(f)
    na, nb = _dual_norm(space.left, a), _dual_norm(space.right, b)
    return np.maximum(na, nb) if space.sum_kind == "l1" else na + nb


def unit_phase(z):
    """z/|z| (1 at zero), computed from the angle so subnormal z stays finite."""
    z = np.asarray(z)
    if np.iscomplexobj(z):
        return np.where(np.abs(z) > 0, np.exp(1j * np.angle(z)), 1.0 + 0j)
    return np.where(z != 0, np.sign(z), 1.0)


def norm(space, x):
    """The norm of ``x`` (or of each row of a batch)."""
    return _norm(space, _check_vector(space, x))


def dual_norm(space, f):
    """The norm of the functional ``f`` in the dual space."""
    return _dual_norm(space, _check_vector(space, f, "f"))


def pair(f, x):
    """Bilinear pairing ``f(x)``."""
    return np.sum(np.asarray(f) * np.asarray(x), axis=-1)


def conj_sign(z):
    """conj(z)/|z| for z != 0 and 0 at 0 (the sign for reals)."""
    z = np.asarray(z)
    a = np.abs(z)
    out = np.zeros_like(z)
    nz = a > 0
    out[nz] = np.conj(z[nz]) / a[nz]
    return out


# ---------------------------------------------------------------------------
# duality sets
#
# A face is a set of norm-one functionals. To answer sup_{g in F} |g(v)|
# exactly, a face reports the image {g(v) : g in F} as a union of "pieces";
# each piece is conv(points) + disk(radius) in the scalar field, together with
# the functionals realizing the points and a rule producing the functional
# that realizes radius * phase. The max modulus over a piece is
# max|points| + radius, and sums/unions of faces compose piece-wise.


@dataclass
class _Piece:
    points: np.ndarray  # (k,) complex
    elems: np.ndarray  # (k, d)
    radius: float
    disk: Callable  # phase -> (d,) functional contributing radius*phase


def _zero_disk(d, dtype):
    return lambda phase: np.zeros(d, dtype=dtype)


class Face:
    """Base class for faces of the dual unit ball."""

    dim: int
    dtype: type

    def pieces(self, v):
        raise NotImplementedError

    def best(self, v):
        """Return ``(sup |g(v)|, g)`` over this face, with ``g`` attaining the sup."""
        best_val, best_g = -np.inf, None
        for pc in self.pieces(v):
            mods = np.abs(pc.points)
            i = int(np.argmax(mods))
            val = float(mods[i] + pc.radius)
            if val > best_val:
                p = pc.points[i]
                phase = unit_phase(p)[()]
                g = pc.elems[i] + pc.disk(phase)
                best_val, best_g = val, g
        if self.dtype is np.float64:
            best_g = np.real(best_g).astype(float)
        return best_val, best_g


@dataclass(eq=False)
class Singleton(Face):
    f: np.ndarray

    def __post_init__(self):
        self.dim, self.dtype = self.f.shape[0], self.f.dtype.type

    def pieces(self, v):
        return [_Piece(np.array([pair(self.f, v)], dtype=complex), self.f[None, :],
                       0.0, _zero_disk(self.dim, self.dtype))]


@dataclass(eq=False)
class FiniteExtremes(Face):
    extremes: np.ndarray  # (k, d)

    def __post_init__(self):
        self.dim, self.dtype = self.extremes.shape[1], self.extremes.dtype.type

    def pieces(self, v):
        return [_Piece((self.extremes @ v).astype(complex), self.extremes, 0.0,
                       _zero_disk(self.dim, self.dtype))]


@dataclass(eq=False)
class BoxFace(Face):
    """Functionals with prescribed coordinates on ``fixed`` and free coordinates of modulus <= bound."""

    fixed: np.ndarray  # (d,) values on fixed coordinates, zero elsewhere
    free: np.ndarray  # (d,) bool mask
    bound: float = 1.0

    def __post_init__(self):
        self.dim, self.dtype = self.fixed.shape[0], self.fixed.dtype.type

    def pieces(self, v):
        v = np.asarray(v)
        free, bound = self.free, self.bound
        radius = bound * float(np.sum(np.abs(v[free])))

        def disk(phase):
            g = np.zeros(self.dim, dtype=complex)
            vf = v[free]
            a = np.abs(vf)
            unit = np.where(a > 0, np.exp(-1j * np.angle(vf)), 0)
            g[free] = bound * phase * unit
            return g

        return [_Piece(np.array([pair(self.fixed, v)], dtype=complex),
                       self.fixed[None, :].astype(complex), radius, disk)]


@dataclass(eq=False)
class BallFace(Face):
    """The whole dual unit ball of ``space`` (a zero component of an l1-sum)."""

    space: NormedSpace

    def __post_init__(self):
        self.dim, self.dtype = self.space.dim, self.space.field.dtype

    def pieces(self, v):
        v = np.asarray(v)
        r = float(_norm(self.space, v))

        def disk(phase):
            if r == 0:
                return np.zeros(self.dim, dtype=complex)
            g = self.space_face(v, r).best(v)[1]
            return phase * g

        return [_Piece(np.zeros(1, dtype=complex), np.zeros((1, self.dim), dtype=complex),
                       r, disk)]

    def space_face(self, v, r):
        return _face(self.space, v, r)


@dataclass(eq=False)
class ProductFace(Face):
    """Faces of two l1-summands taken jointly (a Minkowski-type product)."""

    left: Face
    right: Face

    def __post_init__(self):
        self.dim = self.left.dim + self.right.dim
        self.dtype = np.complex128 if np.complex128 in (self.left.dtype, self.right.dtype) else np.float64

    def pieces(self, v):
        vl, vr = v[:self.left.dim], v[self.left.dim:]
        out = []
        for a in self.left.pieces(vl):
            for b in self.right.pieces(vr):
                pts = (a.points[:, None] + b.points[None, :]).ravel()
                ka, kb = len(a.points), len(b.points)
                elems = np.hstack([np.repeat(a.elems, kb, axis=0), np.tile(b.elems, (ka, 1))])
                out.append(_Piece(pts, elems, a.radius + b.radius,
                                  lambda ph, a=a, b=b: np.concatenate([a.disk(ph), b.disk(ph)])))
        return out


@dataclass(eq=False)
class UnionFace(Face):
    """Convex hull of padded faces of the norm-attaining l_inf-summands."""

    left: Optional[Face]
    right: Optional[Face]
    dl: int
    dr: int
    field_dtype: type = np.float64

    def __post_init__(self):
        self.dim, self.dtype = self.dl + self.dr, self.field_dtype

    def pieces(self, v):
        out = []
        if self.left is not None:
            zr = np.zeros((1, self.dr))
            for pc in self.left.pieces(v[:self.dl]):
                out.append(_Piece(pc.points, np.hstack([pc.elems, np.repeat(zr, len(pc.points), 0)]),
                                  pc.radius,
                                  lambda ph, pc=pc: np.concatenate([pc.disk(ph), np.zeros(self.dr)])))
        if self.right is not None:
            zl = np.zeros((1, self.dl))
            for pc in self.right.pieces(v[self.dl:]):
                out.append(_Piece(pc.points, np.hstack([np.repeat(zl, len(pc.points), 0), pc.elems]),
                                  pc.radius,
                                  lambda ph, pc=pc: np.concatenate([np.zeros(self.dl), pc.disk(ph)])))
        return out


def _face(space, x, s):
    """Face of norm-one functionals g with g(x) = s = ||x|| > 0."""
    dt = space.field.dtype
    if space.kind == "pnorm":
        p = space.p
        a = np.abs(x)
        if space.dim == 1:
            return Singleton(conj_sign(x).astype(dt))
        if np.isinf(p):
            idx = np.flatnonzero(a >= s * (1 - ATTAIN_RTOL))
            E = np.zeros((idx.size, space.dim), dtype=dt)
            E[np.arange(idx.size), idx] = conj_sign(x[idx])
            return FiniteExtremes(E)
        if p == 1.0:
            free = a <= ATTAIN_RTOL * s
            fixed = np.where(free, 0, conj_sign(x)).astype(dt)
            return BoxFace(fixed, free, 1.0)
        g = conj_sign(x) * (a / s) ** (p - 1.0)
        return Singleton(g.astype(dt))
    if space.kind == "poly":
        vals = space.facets @ x
        idx = np.flatnonzero(np.abs(vals) >= s * (1 - ATTAIN_RTOL))
        return FiniteExtremes(np.sign(vals[idx])[:, None] * space.facets[idx])
    xa, xb = space.split(x)
    na, nb = float(_norm(space.left, xa)), float(_norm(space.right, xb))
    if space.sum_kind == "l1":
        fa = _face(space.left, xa, na) if na > ATTAIN_RTOL * s else BallFace(space.left)
        fb = _face(space.right, xb, nb) if nb > ATTAIN_RTOL * s else BallFace(space.right)
        return ProductFace(fa, fb)
    fa = _face(space.left, xa, na) if na >= s * (1 - ATTAIN_RTOL) else None
    fb = _face(space.right, xb, nb) if nb >= s * (1 - ATTAIN_RTOL) else None
    return UnionFace(fa, fb, space.left.dim, space.right.dim, dt)


@dataclass(frozen=True, eq=False)
class DualitySet:
    """D(x) = scale * conv(face): functionals f with f(x) = ||f||*||x|| = ||x||^2."""

    space: NormedSpace
    base_point: np.ndarray
    scale: float
    face: Face

    def sup_abs(self, v):
        v = _check_vector(self.space, v, "v")
        return self.scale * self.face.best(v)[0]

    def argmax(self, v):
        """Element f of D(x) maximizing |f(v)|, with the value |f(v)|."""
        v = _check_vector(self.space, v, "v")
        val, g = self.face.best(v)
        return self.scale * val, self.scale * g

    def representative(self):
        """Some element of D(x) (the maximizer for v = x)."""
        return self.argmax(self.base_point)[1]

    def contains(self, f, tol=1e-9):
        f = _check_vector(self.space, f, "f")
        s2 = self.scale ** 2
        ok_val = abs(pair(f, self.base_point) - s2) <= tol * max(1.0, s2)
        ok_norm = abs(_dual_norm(self.space, f) - self.scale) <= tol * max(1.0, self.scale)
        return bool(ok_val and ok_norm)


def duality_set(space, x):
    """The duality set D(x) of a nonzero vector ``x``."""
    x = _check_vector(space, x)
    if x.ndim != 1:
        raise InputError("duality_set takes a single vector")
    s = float(_norm(space, x))
    if s == 0:
        raise DomainError("D(0) is degenerate; x must be nonzero")
    return DualitySet(space, x, s, _face(space, x, s))


def duality_sup_abs(D, v):
    """sup over f in D of |f(v)|, computed in closed form."""
    return D.sup_abs(v)


# ---------------------------------------------------------------------------
# batched face suprema (same quantity as Face.best, vectorized over rows)


def _face_pieces_batch(space, Z, V, s):
    """List of (P, M, R): P (N,K) image points, M (N,K) validity mask, R (N,) radius."""
    N = Z.shape[0]
    if space.kind == "pnorm":
        p = space.p
        a = np.abs(Z)
        if space.dim == 1:
            P = conj_sign(Z) * V
            return [(P.astype(complex), np.ones_like(P, dtype=bool), np.zeros(N))]
        if np.isinf(p):
            M = a >= s[:, None] * (1 - ATTAIN_RTOL)
            return [((conj_sign(Z) * V).astype(complex), M, np.zeros(N))]
        if p == 1.0:
            free = a <= ATTAIN_RTOL * s[:, None]
            P = np.sum(np.where(free, 0, conj_sign(Z) * V), axis=-1)[:, None]
            R = np.sum(np.where(free, np.abs(V), 0), axis=-1)
            return [(P.astype(complex), np.ones((N, 1), bool), R)]
        safe = np.where(s > 0, s, 1.0)[:, None]
        g = conj_sign(Z) * (a / safe) ** (p - 1.0)
        P = np.sum(g * V, axis=-1)[:, None]
        return [(P.astype(complex), np.ones((N, 1), bool), np.zeros(N))]
    if space.kind == "poly":
        A = Z @ space.facets.T
        M = np.abs(A) >= s[:, None] * (1 - ATTAIN_RTOL)
        return [((np.sign(A) * (V @ space.facets.T)).astype(complex), M, np.zeros(N))]
    Za, Zb = space.split(Z)
    Va, Vb = space.split(V)
    na, nb = _norm(space.left, Za), _norm(space.right, Zb)
    if space.sum_kind == "l1":
        sides = []
        for comp, Zc, Vc, nc in ((space.left, Za, Va, na), (space.right, Zb, Vb, nb)):
            live = nc > ATTAIN_RTOL * s
            pcs = [(P, M & live[:, None], R) for P, M, R in _face_pieces_batch(comp, Zc, Vc, nc)]
            pcs.append((np.zeros((N, 1), complex), ~live[:, None], _norm(comp, Vc)))
            sides.append(pcs)
        out = []
        for Pa, Ma, Ra in sides[0]:
            for Pb, Mb, Rb in sides[1]:
                P = (Pa[:, :, None] + Pb[:, None, :]).reshape(N, -1)
                M = (Ma[:, :, None] & Mb[:, None, :]).reshape(N, -1)
                out.append((P, M, Ra + Rb))
        return out
    out = []
    for comp, Zc, Vc, nc in ((space.left, Za, Va, na), (space.right, Zb, Vb, nb)):
        live = nc >= s * (1 - ATTAIN_RTOL)
        out += [(P, M & live[:, None], R) for P, M, R in _face_pieces_batch(comp, Zc, Vc, nc)]
    return out


def face_sup_batch(space, Z, V):
    """For each row: sup over norm-one g in D(z) of |g(v)|; i.e. sup_abs(D(z), v)/||z||."""
    Z = np.atleast_2d(Z)
    V = np.atleast_2d(V)
    s = _norm(space, Z)
    best = np.full(Z.shape[0], -np.inf)
    for P, M, R in _face_pieces_batch(space, Z, V, s):
        m = np.max(np.where(M, np.abs(P), -np.inf), axis=-1) + R
        best = np.maximum(best, m)
    return best


# ---------------------------------------------------------------------------
# extreme points and sampling


def has_finite_extremes(space):
    """True when the unit ball is a polytope given by a finite vertex list."""
    if space.is_complex:
        return False
    if space.kind == "pnorm":
        return space.p in (1.0, np.inf) or space.dim == 1
    if space.kind == "poly":
        return True
    return has_finite_extremes(space.left) and has_finite_extremes(space.right)


def ball_extreme_points(space):
    """Vertices of the unit ball for polyhedral-type real spaces."""
    if not has_finite_extremes(space):
        raise UnsupportedKindError(f"{space.spec} has no finite list of extreme points")
    n = space.dim
    if space.kind == "pnorm":
        if n == 1:
            return np.array([[1.0], [-1.0]])
        if space.p == 1.0:
            E = np.zeros((2 * n, n))
            for i in range(n):
                E[2 * i, i], E[2 * i + 1, i] = 1.0, -1.0
            return E
        return np.array(list(itertools.product([1.0, -1.0], repeat=n)))
    if space.kind == "poly":
        return np.array(space.vertices)
    A, B = ball_extreme_points(space.left), ball_extreme_points(space.right)
    if space.sum_kind == "l1":
        return np.vstack([np.hstack([A, np.zeros((len(A), B.shape[1]))]),
                          np.hstack([np.zeros((len(B), A.shape[1])), B])])
    return np.array([np.concatenate([a, b]) for a in A for b in B])


def dual_ball_extreme_points(space):
    """Extreme points of the dual unit ball, up to unimodular scalars, or None.

    Complex spaces are reduced modulo a global phase, which is harmless for
    the phase-invariant quantities (norms) this is used for.
    """
    n = space.dim
    if space.kind == "pnorm":
        if n == 1:
            return np.array([[1.0]]) if space.is_complex else np.array([[1.0], [-1.0]])
        if np.isinf(space.p):
            return np.eye(n) if space.is_complex else np.vstack([np.eye(n), -np.eye(n)])
        if space.p == 1.0 and not space.is_complex:
            return np.array(list(itertools.product([1.0, -1.0], repeat=n)))
        return None
    if space.kind == "poly":
        return np.vstack([space.facets, -space.facets])
    if space.is_complex:
        return None
    A, B = dual_ball_extreme_points(space.left), dual_ball_extreme_points(space.right)
    if A is None or B is None:
        return None
    if space.sum_kind == "linf":
        return np.vstack([np.hstack([A, np.zeros((len(A), B.shape[1]))]),
                          np.hstack([np.zeros((len(B), A.shape[1])), B])])
    return np.array([np.concatenate([a, b]) for a in A for b in B])


def sample_sphere(space, count, seed):
    """``count`` points of the unit sphere: Gaussian directions normalized in the space norm."""
    if count < 1:
        raise InputError("count must be >= 1")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((count, space.dim))
    if space.is_complex:
        G = G + 1j * rng.standard_normal((count, space.dim))
    return G / _norm(space, G)[:, None]


# ---------------------------------------------------------------------------
# strata: a parametrization of (a superset of) the extreme points of the ball


@dataclass
class Stratum:
    """A family of unit vectors containing some extreme points of the ball.

    Either a finite array ``points`` or a map ``embed`` from ``param_dim``
    free parameters (batched along axis 0) to unit vectors.
    """

    points: Optional[np.ndarray] = None
    param_dim: int = 0
    embed: Optional[Callable] = None
    angle: bool = False  # parameter is a single planar angle

    @property
    def finite(self):
        return self.points is not None


def strata(space, phase_reduce=True):
    """Strata covering ext(B_X), modulo a global unimodular scalar when ``phase_reduce``.

    Suprema of convex, phase-invariant functions over the unit ball may be
    restricted to these strata.
    """
    n = space.dim
    if has_finite_extremes(space):
        return [Stratum(points=ball_extreme_points(space))]
    if space.kind == "pnorm":
        p = space.p
        if space.is_complex:
            if n == 1 or p == 1.0:
                if phase_reduce:
                    return [Stratum(points=np.eye(n, dtype=complex))]
                out = []
                for j in range(n):
                    def emb(U, j=j):
                        z = U[:, 0] + 1j * U[:, 1]
                        X = np.zeros((U.shape[0], n), complex)
                        X[:, j] = z / np.abs(z)
                        return X
                    out.append(Stratum(param_dim=2, embed=emb))
                return out
            if np.isinf(p):
                if phase_reduce:
                    def emb(U):
                        return np.exp(1j * np.column_stack([np.zeros(U.shape[0]), U]))
                    return [Stratum(param_dim=n - 1, embed=emb)]
                return [Stratum(param_dim=n, embed=lambda U: np.exp(1j * U))]

            def emb(U):
                Zc = U[:, :n] + 1j * U[:, n:]
                return Zc / _pnorm_abs(np.abs(Zc), p)[:, None]
            return [Stratum(param_dim=2 * n, embed=emb)]
        if n == 2:
            def emb(U):
                Zr = np.column_stack([np.cos(U[:, 0]), np.sin(U[:, 0])])
                return Zr / _pnorm_abs(np.abs(Zr), p)[:, None]
            return [Stratum(param_dim=1, embed=emb, angle=True)]

        def emb(U):
            return U / _pnorm_abs(np.abs(U), p)[:, None]
        return [Stratum(param_dim=n, embed=emb)]
    if space.kind == "poly":  # pragma: no cover - polyhedral always finite
        return [Stratum(points=ball_extreme_points(space))]
    SA = strata(space.left, phase_reduce=False)
    SB = strata(space.right, phase_reduce=False)
    da, db = space.left.dim, space.right.dim
    dt = space.field.dtype
    if space.sum_kind == "l1":
        return [_pad_stratum(s, da, db, True, dt) for s in SA] + \
               [_pad_stratum(s, da, db, False, dt) for s in SB]
    out = []
    for a in SA:
        for b in SB:
            out.extend(_product_strata(a, b, dt))
    return out


def _pad_stratum(s, da, db, is_left, dt):
    def pad(X):
        Zp = np.zeros((X.shape[0], da + db), dtype=dt)
        if is_left:
            Zp[:, :da] = X
        else:
            Zp[:, da:] = X
        return Zp
    if s.finite:
        return Stratum(points=pad(s.points))
    return Stratum(param_dim=s.param_dim, embed=lambda U: pad(s.embed(U)), angle=s.angle)


def _product_strata(a, b, dt):
    if a.finite and b.finite:
        P = np.array([np.concatenate([x, y]) for x in a.points for y in b.points], dtype=dt)
        return [Stratum(points=P)]
    if a.finite:
        return [Stratum(param_dim=b.param_dim, angle=b.angle,
                        embed=lambda U, x=x: np.hstack([np.repeat(x[None, :].astype(dt), U.shape[0], 0),
                                                        b.embed(U).astype(dt)]))
                for x in a.points]
    if b.finite:
        return [Stratum(param_dim=a.param_dim, angle=a.angle,
                        embed=lambda U, y=y: np.hstack([a.embed(U).astype(dt),
                                                        np.repeat(y[None, :].astype(dt), U.shape[0], 0)]))
                for y in b.points]
    k = a.param_dim
    return [Stratum(param_dim=k + b.param_dim,
                    embed=lambda U: np.hstack([a.embed(U[:, :k]).astype(dt), b.embed(U[:, k:]).astype(dt)]))]


def stratum_design(stratum, count, rng):
    """Parameter samples for a continuous stratum."""
    if stratum.angle:
        return (np.arange(count)[:, None] + rng.uniform()) * (2 * np.pi / count)
    return rng.standard_normal((count, stratum.param_dim))


@dataclass
class StrataMax:
    value: float
    point: np.ndarray
    candidates: np.ndarray = field(repr=False)
    exact: bool = False


def maximize_over_strata(space, fun, samples=256, refine=2, seed=0, extra=None):
    """Maximize a batched function ``fun((N, dim)) -> (N,)`` over the strata of ``space``.

    Finite strata are enumerated; continuous strata get ``samples`` design
    points followed by Nelder-Mead refinement of the ``refine`` best. The
    result is exact when every stratum is finite.
    """
    from ._optim import nelder_mead_max, top_indices

    rng = np.random.default_rng(seed)
    cands, vals = [], []
    exact = True
    for st in strata(space):
        if st.finite:
            Zs = st.points
            cands.append(Zs)
            vals.append(fun(Zs))
            continue
        exact = False
        U = stratum_design(st, samples, rng)
        Zs = st.embed(U)
        v = fun(Zs)
        cands.append(Zs)
        vals.append(v)
        for i in top_indices(v, refine):
            u, _ = nelder_mead_max(lambda u: float(fun(st.embed(u[None, :]))[0]), U[i])
            z = st.embed(u[None, :])
            cands.append(z)
            vals.append(fun(z))
    if extra is not None and len(extra):
        E = np.atleast_2d(extra)
        E = E / _norm(space, E)[:, None]
        cands.append(E)
        vals.append(fun(E))
    Z = np.vstack(cands)
    v = np.concatenate(vals)
    i = int(np.argmax(v))
    return StrataMax(float(v[i]), Z[i], Z, exact)


# ---------------------------------------------------------------------------
# numerically stable norm increments ||z + t w|| - ||z||


def _inc_abs(a, b, t):
    """|a + t b| - |a| without cancellation."""
    c = a + t * b
    num = t * (2 * np.real(np.conj(a) * b) + t * np.abs(b) ** 2)
    den = np.abs(c) + np.abs(a)
    return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)


def norm_increment(space, z, w, t):
    """``||z + t*w|| - ||z||`` evaluated without catastrophic cancellation."""
    z = np.asarray(z)
    w = np.asarray(w)
    if space.kind == "pnorm":
        p = space.p
        if p == 1.0:
            return np.sum(_inc_abs(z, w, t), axis=-1)
        if np.isinf(p):
            a = np.abs(z)
            nz = np.max(a, axis=-1, keepdims=True)
            return np.max(_inc_abs(z, w, t) + (a - nz), axis=-1)
        nz = _pnorm_abs(np.abs(z), p)
        if p == 2.0:
            nzw = _pnorm_abs(np.abs(z + t * w), 2.0)
            num = t * (2 * np.real(np.sum(np.conj(z) * w, axis=-1)) + t * np.sum(np.abs(w) ** 2, axis=-1))
            den = nzw + nz
            return np.divide(num, den, out=np.zeros(np.shape(num)), where=den > 0)
        a = np.abs(z)
        safe = np.where(a > 0, a, 1.0)
        r = w / np.where(a > 0, z, 1.0)
        log_ratio = 0.5 * np.log1p(np.maximum(2 * t * np.real(r) + t * t * np.abs(r) ** 2, -1 + 1e-300))
        term = np.where(a > 0, safe ** p * np.expm1(p * log_ratio), (t * np.abs(w)) ** p)
        S = np.sum(term, axis=-1)
        base = np.where(nz > 0, nz, 1.0)
        return np.where(nz > 0, base * np.expm1(np.log1p(np.maximum(S / base ** p, -1.0 + 1e-300)) / p),
                        _pnorm_abs(np.abs(t * w), p))
    if space.kind == "poly":
        A, B = z @ space.facets.T, w @ space.facets.T
        a = np.abs(A)
        nz = np.max(a, axis=-1, keepdims=True)
        return np.max(_inc_abs(A, B, t) + (a - nz), axis=-1)
    za, zb = space.split(z)
    wa, wb = space.split(w)
    ia = norm_increment(space.left, za, wa, t)
    ib = norm_increment(space.right, zb, wb, t)
    if space.sum_kind == "l1":
        return ia + ib
    na, nb = _norm(space.left, za), _norm(space.right, zb)
    nz = np.maximum(na, nb)
    return np.maximum(ia + (na - nz), ib + (nb - nz))
