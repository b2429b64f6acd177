"""Linear operators on a normed space: norms, numerical radius brackets and
the Daugavet-type gap."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import spaces as sp
from ._optim import golden_max_periodic, nelder_mead_max, top_indices
from .errors import InputError
from .spaces import Field, NormedSpace

CLOSED_FORM = "ClosedForm"
LIMIT_FORMULA = "LimitFormula"
CELL_SUP = "CellSup"

DEFAULT_T_SCHEDULE = 2.0 ** -np.arange(1, 41)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    space: NormedSpace
    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix)
        n = self.space.dim
        if A.shape != (n, n):
            raise InputError(f"matrix shape {A.shape} does not match dimension {n}")
        if not np.all(np.isfinite(A)):
            raise InputError("matrix entries must be finite")
        if self.space.is_complex:
            A = A.astype(complex)
        else:
            if np.iscomplexobj(A):
                if np.any(np.imag(A) != 0):
                    raise InputError("complex matrix on a real space")
                A = np.real(A)
            A = A.astype(float)
        A = A.copy()
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    def __call__(self, x):
        return np.asarray(x) @ self.matrix.T

    def scaled(self, a):
        return LinearOperator(self.space, a * self.matrix)

    def plus_identity(self, t, alpha=1.0):
        """The operator I + t*alpha*T."""
        return LinearOperator(self.space, np.eye(self.space.dim) + t * alpha * self.matrix)

    @cached_property
    def norm(self):
        return op_norm(self)

    def __repr__(self):
        return f"LinearOperator({self.space.spec}, {self.matrix.tolist()})"


def identity(space):
    return LinearOperator(space, np.eye(space.dim))


@dataclass
class AlphaGrid:
    """Unit scalars over which the limit formula and the Daugavet gap maximize."""

    field: Field
    values: np.ndarray
    refine: bool = True

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0:
            raise InputError("alpha grid needs at least one value")
        if np.any(np.abs(np.abs(v) - 1) > 1e-12):
            raise InputError("alpha values must be unimodular")
        self.values = v.astype(complex if self.field is Field.COMPLEX else float)

    @classmethod
    def default(cls, field, m=64, refine=True):
        if isinstance(field, NormedSpace):
            field = field.field
        if field is Field.REAL:
            return cls(field, np.array([1.0, -1.0]), refine=False)
        return cls(field, np.exp(2j * np.pi * np.arange(m) / m), refine=refine)


@dataclass
class Witness:
    """A two-point numerical range witness: the value is |f(Tx - Ty)| / ||x - y||^2."""

    x: np.ndarray
    y: np.ndarray
    f: np.ndarray

    def value(self, T):
        space = T.space
        d = self.x - self.y
        img = np.asarray(T(self.x)) - np.asarray(T(self.y))
        return float(abs(sp.pair(self.f, img)) / sp.norm(space, d) ** 2)


@dataclass
class RadiusBracket:
    """Two-sided bracket for the numerical radius."""

    lower: float
    upper: float
    lower_witness: Optional[Witness]
    upper_method: str
    tol: float
    converged: bool = True
    details: dict = field(default_factory=dict)

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value, slack=0.0):
        return self.lower - slack <= value <= self.upper + slack


# ---------------------------------------------------------------------------
# operator norms between spaces


def _rt_bound(A, p):
    """Riesz-Thorin bound for the p -> p norm of a matrix."""
    n1 = np.max(np.sum(np.abs(A), axis=0))
    ninf = np.max(np.sum(np.abs(A), axis=1))
    if np.isinf(p):
        return ninf
    return n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p)


def _pnorm_upper(A, p, r):
    """Certified bound for ||A : l_p -> l_r||."""
    m, n = A.shape
    ip, ir = 1.0 / p, 1.0 / r
    to_r = m ** max(0.0, ir - ip)
    via_rt = _rt_bound(A, p) * to_r
    s = np.linalg.norm(A, 2)
    via_2 = s * n ** max(0.0, 0.5 - ip) * m ** max(0.0, ir - 0.5)
    return min(via_rt, via_2)


def _exact_norm(X, Y, A):
    """Exact ||A : X -> Y|| when a finite formula exists, else None."""
    st = sp.strata(X)
    if all(s.finite for s in st):
        P = np.vstack([s.points for s in st])
        return float(np.max(sp._norm(Y, P @ A.T)))
    G = sp.dual_ball_extreme_points(Y)
    if G is not None:
        return float(np.max(sp._dual_norm(X, G @ A)))
    if X.kind == "pnorm" and Y.kind == "pnorm" and X.p == 2.0 and Y.p == 2.0:
        return float(np.linalg.norm(A, 2))
    return None


def _norm_upper(X, Y, A):
    ex = _exact_norm(X, Y, A)
    if ex is not None:
        return ex
    if X.kind == "sum":
        Aa, Ab = A[:, :X.left.dim], A[:, X.left.dim:]
        ua, ub = _norm_upper(X.left, Y, Aa), _norm_upper(X.right, Y, Ab)
        return max(ua, ub) if X.sum_kind == "l1" else ua + ub
    if Y.kind == "sum":
        Aa, Ab = A[:Y.left.dim], A[Y.left.dim:]
        ua, ub = _norm_upper(X, Y.left, Aa), _norm_upper(X, Y.right, Ab)
        return max(ua, ub) if Y.sum_kind == "linf" else ua + ub
    if X.kind == "pnorm" and Y.kind == "pnorm":
        return float(_pnorm_upper(A, X.p, Y.p))
    raise AssertionError("unreachable: polyhedral pieces are exact")  # pragma: no cover


def _norm_lower(X, A, samples=256, seed=0, refine=3):
    res = sp.maximize_over_strata(X, lambda Z: sp._norm(X, Z @ A.T), samples=samples,
                                  refine=refine, seed=seed)
    return res.value, res.point


def op_norm_bracket(T, samples=256, seed=0):
    """``(lower, upper, exact)`` for the operator norm; lower is attained at a unit vector."""
    X, A = T.space, T.matrix
    ex = _exact_norm(X, X, A)
    if ex is not None:
        return ex, ex, True
    lo, _ = _norm_lower(X, A, samples, seed)
    up = _norm_upper(X, X, A)
    return lo, max(lo, up), False


def op_norm(T, samples=256, seed=0):
    """Operator norm of ``T``.

    Exact when the unit ball (or the dual ball of the codomain) has finitely
    many extreme points up to phase, and for Euclidean spaces. Otherwise the
    value of an optimized multistart search, which is attained at a unit
    vector and so is always a lower bound; ``op_norm_bracket`` adds a
    certified upper bound.
    """
    return op_norm_bracket(T, samples, seed)[0]


# ---------------------------------------------------------------------------
# numerical range and lower bounds


@dataclass
class RangeSample:
    values: np.ndarray  # f(Tx)
    points: np.ndarray
    functionals: np.ndarray


def numerical_range_points(T, count, seed):
    """Values f(Tx) for sampled unit x and the element f of D(x) maximizing |f(Tx)|."""
    if count < 1:
        raise InputError("count must be >= 1")
    X = sp.sample_sphere(T.space, count, seed)
    vals, funcs = [], []
    for x in X:
        _, f = sp.duality_set(T.space, x).argmax(T(x))
        funcs.append(f)
        vals.append(sp.pair(f, T(x)))
    return RangeSample(np.array(vals), X, np.array(funcs))


def _radius_objective(T):
    X, A = T.space, T.matrix
    return lambda Z: sp.face_sup_batch(X, Z, Z @ A.T)


def _radius_lower_search(T, budget, seed, refine=3):
    X = T.space
    extra = sp.sample_sphere(X, max(1, budget // 4), seed + 7919)
    return sp.maximize_over_strata(X, _radius_objective(T), samples=max(16, budget),
                                   refine=refine, seed=seed, extra=extra)


def _witness_at(T, x):
    x = np.asarray(x)
    x = x / sp.norm(T.space, x)
    val, f = sp.duality_set(T.space, x).argmax(T(x))
    return float(val), Witness(x, np.zeros_like(x), f)


def radius_lower(T, budget=256, seed=0):
    """A lower bound for the numerical radius with a reproducible witness."""
    if budget < 1:
        raise InputError("budget must be >= 1")
    res = _radius_lower_search(T, budget, seed)
    return _witness_at(T, res.point)


# ---------------------------------------------------------------------------
# limit formula


@dataclass
class LimitSequence:
    """Upper bounds u_k = max_alpha (||I + t_k alpha T|| - 1)/t_k."""

    t: np.ndarray
    bounds: np.ndarray  # running minima of raw (each entry is still an upper bound)
    raw: np.ndarray
    alpha_count: int
    best_alpha: complex

    @property
    def final(self):
        return float(self.bounds[-1])

    def __len__(self):
        return len(self.bounds)

    def __getitem__(self, k):
        return self.bounds[k]

    def __iter__(self):
        return iter(self.bounds)


def _check_schedule(ts):
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise InputError("t schedule must be a non-empty sequence")
    if np.any(~(ts > 0)):
        raise InputError("t schedule entries must be positive")
    if np.any(np.diff(ts) >= 0):
        raise InputError("t schedule must be strictly decreasing")
    return ts


class _QuotientModel:
    """Evaluates q(t, alpha) = (||I + t alpha T|| - 1)/t on grids of (t, alpha)."""

    def __init__(self, T, budget=256, seed=0, lower_points=None):
        self.T = T
        X, A = T.space, T.matrix
        self.X, self.A = X, A
        self.kind = None
        if X.kind == "pnorm" and X.p == 2.0:
            self.kind = "l2"
        elif X.kind == "pnorm" and np.isinf(X.p):
            self.kind = "rows"
        elif X.kind == "pnorm" and X.p == 1.0:
            self.kind = "cols"
        elif all(s.finite for s in sp.strata(X)):
            self.kind = "points"
            self.C = np.vstack([s.points for s in sp.strata(X)])
        else:
            self.kind = "search"
            self.budget, self.seed = budget, seed
            rng = np.random.default_rng(seed)
            cands = []
            for st in sp.strata(X):
                if st.finite:
                    cands.append(st.points)
                else:
                    cands.append(st.embed(sp.stratum_design(st, max(16, budget), rng)))
            if lower_points is not None:
                cands.append(np.atleast_2d(lower_points))
            self.C = np.vstack([c.astype(X.field.dtype) for c in cands])
        self.exact = self.kind != "search"

    def q(self, ts, alphas):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        alphas = np.atleast_1d(alphas)
        A = self.A
        if self.kind == "l2":
            AH = np.conj(A.T)
            G = AH @ A
            S = alphas[:, None, None] * A + np.conj(alphas)[:, None, None] * AH
            M = S[None] + ts[:, None, None, None] * G
            lam = np.linalg.eigvalsh(M)[..., -1]
            return lam / (np.sqrt(np.maximum(1.0 + ts[:, None] * lam, 0.0)) + 1.0)
        if self.kind in ("rows", "cols"):
            B = A if self.kind == "rows" else A.T
            diag = np.diag(B)
            off = np.sum(np.abs(B), axis=1) - np.abs(diag)
            d = ts[:, None, None] * alphas[None, :, None] * diag[None, None, :]
            inc = sp._inc_abs(np.ones_like(d), d, 1.0) / ts[:, None, None]
            return np.max(inc + off[None, None, :], axis=-1)
        return self._q_points(self.C, ts, alphas)

    def _q_points(self, C, ts, alphas):
        W = C @ self.A.T
        out = np.empty((len(ts), len(alphas)))
        for j, a in enumerate(alphas):
            for k, t in enumerate(ts):
                out[k, j] = np.max(sp.norm_increment(self.X, C, a * W, t)) / t
        return out

    def improve(self, t, alpha, refine=2):
        """Search for points raising q(t, alpha) and add them to the candidate set."""
        if self.kind != "search":
            return
        X, A = self.X, self.A

        def fun(Z):
            return sp.norm_increment(X, Z, alpha * (Z @ A.T), t) / t

        rng = np.random.default_rng(self.seed + 1)
        new = []
        vals = fun(self.C)
        for st in sp.strata(X):
            if st.finite:
                continue
            U0 = sp.stratum_design(st, max(16, self.budget), rng)
            Z0 = st.embed(U0)
            v0 = fun(Z0)
            new.append(Z0[top_indices(v0, refine)])
            for i in top_indices(v0, refine):
                u, _ = nelder_mead_max(lambda u: float(fun(st.embed(u[None, :]))[0]), U0[i])
                new.append(st.embed(u[None, :]))
        for i in top_indices(vals, refine):
            new.append(_polish_point(X, fun, self.C[i]))
        self.C = np.vstack([self.C] + [np.atleast_2d(z).astype(X.field.dtype) for z in new])


def _polish_point(X, fun, z):
    """Local ascent from a unit vector in ambient coordinates (renormalized)."""
    cplx = X.is_complex

    def unpack(u):
        v = u[:X.dim] + 1j * u[X.dim:] if cplx else u
        return (v / sp._norm(X, v))[None, :]

    u0 = np.concatenate([z.real, z.imag]) if cplx else np.asarray(z, float)
    u, _ = nelder_mead_max(lambda u: float(fun(unpack(u))[0]), u0, maxiter=4000)
    return unpack(u)[0]


def radius_upper_limit(T, t_schedule=None, alphas=None, budget=256, seed=0, lower_points=None):
    """Nonincreasing sequence of upper bounds for the numerical radius.

    u_k = max over alpha of (||I + t_k alpha T|| - 1)/t_k. Each u_k is an upper
    bound and the raw sequence is monotone in exact arithmetic; the reported
    ``bounds`` take running minima, which removes rounding-level wiggles while
    keeping every entry an upper bound.
    """
    ts = _check_schedule(DEFAULT_T_SCHEDULE if t_schedule is None else t_schedule)
    X = T.space
    if alphas is None:
        alphas = AlphaGrid.default(X.field)
    avals = list(alphas.values)
    model = _QuotientModel(T, budget, seed, lower_points)
    if lower_points is not None:
        for z in np.atleast_2d(lower_points):
            val = sp.pair(sp.duality_set(X, z).argmax(T(z))[1], T(z))
            if abs(val) > 0:
                a = np.conj(sp.unit_phase(val)[()])
                avals.append(a if X.is_complex else float(np.sign(np.real(a))))
    t_min = ts[-1]
    if not model.exact:
        first = model.q([t_min], np.array(avals))[0]
        for j in top_indices(first, 2 if X.is_complex else len(avals)):
            model.improve(t_min, avals[j])
    if X.is_complex and alphas.refine:
        last = model.q([t_min], np.array(avals))[0]
        j = int(np.argmax(last))
        theta0 = float(np.angle(avals[j]))
        step = 2 * np.pi / max(len(alphas.values), 4)
        th, _ = golden_max_periodic(lambda th: float(model.q([t_min], np.array([np.exp(1j * th)]))[0, 0]),
                                    theta0, step, tol=1e-12)
        avals.append(np.exp(1j * th))
        if not model.exact:
            model.improve(t_min, avals[-1])
    alist = np.array(avals)
    U = model.q(ts, alist)
    raw = np.max(U, axis=1)
    best = alist[int(np.argmax(U[-1]))]
    return LimitSequence(ts, np.minimum.accumulate(raw), raw, len(alist), complex(best))


# ---------------------------------------------------------------------------
# numerical radius


def _complex_l2_radius(A, tol, max_angles=1 << 16):
    """Certified numerical radius for the complex Euclidean norm.

    The support function h(theta) = lambda_max((e^{i theta} A + h.c.)/2) gives
    boundary points of the field of values (lower bounds) and supporting lines
    whose polygon contains it (upper bound). Every angular gap whose polygon
    corner sticks out by more than ``tol`` is bisected until none is left.
    """
    AH = np.conj(A.T)

    def probe(th):
        e = np.exp(1j * th)[:, None, None]
        w, V = np.linalg.eigh((e * A + np.conj(e) * AH) / 2)
        X = V[:, :, -1]
        z = np.einsum("ki,ij,kj->k", np.conj(X), A, X)
        return w[:, -1], X, z

    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    h, X, z = probe(th)
    while True:
        lower = float(np.max(np.abs(z)))
        t1, t2 = th, np.roll(th, -1)
        t2 = np.where(t2 <= t1, t2 + 2 * np.pi, t2)
        h1, h2 = h, np.roll(h, -1)
        # corner of the lines cos(t) x - sin(t) y = h for consecutive angles
        det = -np.cos(t1) * np.sin(t2) + np.sin(t1) * np.cos(t2)
        xs = (-h1 * np.sin(t2) + np.sin(t1) * h2) / det
        ys = (np.cos(t1) * h2 - np.cos(t2) * h1) / det
        verts = np.hypot(xs, ys)
        upper = float(np.max(verts))
        bad = verts > lower + tol
        if not bad.any() or th.size >= max_angles:
            break
        mid = ((t1[bad] + t2[bad]) / 2) % (2 * np.pi)
        hm, Xm, zm = probe(mid)
        th = np.concatenate([th, mid])
        order = np.argsort(th)
        th, h = th[order], np.concatenate([h, hm])[order]
        X, z = np.concatenate([X, Xm])[order], np.concatenate([z, zm])[order]
    k = int(np.argmax(np.abs(z)))
    return lower, max(upper, lower), X[k], upper - lower <= tol


def _finite_radius(T):
    X = T.space
    P = np.vstack([s.points for s in sp.strata(X)])
    vals = _radius_objective(T)(P)
    return _witness_at(T, P[int(np.argmax(vals))])


def _linf_radius(T):
    """Complex or real l_inf: the radius is the max absolute row sum."""
    A = T.matrix
    i = int(np.argmax(np.sum(np.abs(A), axis=1)))
    row = A[i]
    ph = sp.unit_phase(row[i])[()]
    x = np.where(np.abs(row) > 0, ph * np.conj(sp.unit_phase(row)), 1.0)
    x[i] = 1.0
    if not T.space.is_complex:
        x = np.real(x)
    return _witness_at(T, x.astype(T.space.field.dtype))


def numerical_radius(T, tol=1e-6, budget=256, seed=0, max_rounds=4, t_schedule=None,
                     alphas=None):
    """Bracket [lower, upper] for the numerical radius of ``T``."""
    if not tol > 0:
        raise InputError("tol must be positive")
    X, A = T.space, T.matrix
    if X.kind == "pnorm" and X.p == 2.0:
        if not X.is_complex:
            w, V = np.linalg.eigh((A + A.T) / 2)
            k = int(np.argmax(np.abs(w)))
            lo, wit = _witness_at(T, V[:, k])
            up = float(abs(w[k]))
            return RadiusBracket(min(lo, up), up, wit, CLOSED_FORM, tol, True,
                                 {"path": "symmetric-part eigenvalues"})
        lo, up, x, ok = _complex_l2_radius(A, tol)
        val, wit = _witness_at(T, x)
        return RadiusBracket(val, max(up, val), wit, CLOSED_FORM, tol, ok,
                             {"path": "Hermitian-part support polygon"})
    if X.kind == "pnorm" and np.isinf(X.p):
        lo, wit = _linf_radius(T)
        up = float(np.max(np.sum(np.abs(A), axis=1)))
        return RadiusBracket(min(lo, up), up, wit, CLOSED_FORM, tol, up - lo <= tol,
                             {"path": "max absolute row sum"})
    if all(s.finite for s in sp.strata(X)):
        lo, wit = _finite_radius(T)
        return RadiusBracket(lo, lo, wit, CLOSED_FORM, tol, True,
                             {"path": "ball extreme points"})
    ts = DEFAULT_T_SCHEDULE if t_schedule is None else t_schedule
    b = budget
    for _ in range(max_rounds):
        res = _radius_lower_search(T, b, seed)
        lo, wit = _witness_at(T, res.point)
        lim = radius_upper_limit(T, ts, alphas, budget=b, seed=seed,
                                 lower_points=res.candidates[top_indices(_radius_objective(T)(res.candidates), 4)])
        up = max(lim.final, lo)
        if up - lo <= tol:
            break
        b *= 2
    return RadiusBracket(lo, up, wit, LIMIT_FORMULA, tol, up - lo <= tol,
                         {"t_min": float(np.min(ts)), "alpha_count": lim.alpha_count,
                          "budget": b})


# ---------------------------------------------------------------------------
# Daugavet-type gap


def max_identity_plus(T, alphas=None, samples=256, seed=0):
    """max over alpha of ||I + alpha T||, with alpha refinement in the complex case."""
    if alphas is None:
        alphas = AlphaGrid.default(T.space.field)

    def nrm(a):
        return op_norm(T.plus_identity(1.0, a), samples, seed)

    vals = [nrm(a) for a in alphas.values]
    best = max(vals)
    if T.space.is_complex and alphas.refine:
        j = int(np.argmax(vals))
        step = 2 * np.pi / max(len(alphas.values), 4)
        _, v = golden_max_periodic(lambda th: nrm(np.exp(1j * th)), float(np.angle(alphas.values[j])),
                                   step, tol=1e-10)
        best = max(best, v)
    return best


def daugavet_gap(T, alphas=None, samples=256, seed=0):
    """(1 + ||T||) - max_alpha ||I + alpha T||; zero exactly when the radius equals the norm."""
    return (1.0 + op_norm(T, samples, seed)) - max_identity_plus(T, alphas, samples, seed)
