"""Explicit constructions on finite-dimensional spaces: Lipschitz extension
from a segment, the midpoint join, lush-type witnesses, the C(K)-style radius
witness boost, witness alignment in l_inf-sums, compression of operators on
sums to a summand, and blockwise diagonal lifts."""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog, minimize

from . import lipop
from . import spaces as sp
from ._optim import INVPHI, golden_section
from .errors import GenerationError, InputError, NotFoundError
from .linop import LinearOperator, op_norm
from .lipop import Cell, PwlOperator

SAMPLED = "SampledQuotients"
PER_CELL = "PerCell"


# ---------------------------------------------------------------------------
# generic operator helpers


def apply(T, X):
    """Evaluate a LinearOperator, PwlOperator or LipschitzCallable on a point or rows."""
    if isinstance(T, PwlOperator):
        return lipop.eval_pwl(T, X)
    return T(X)


def lip_constant(T):
    if isinstance(T, LinearOperator):
        return op_norm(T)
    if isinstance(T, PwlOperator):
        return lipop.lip_norm(T)
    return T.lipschitz_bound


def domain_of(T):
    return T.domain if isinstance(T, LipschitzCallable) else T.space


@dataclass(frozen=True, eq=False)
class LipschitzCallable:
    """A Lipschitz map given by a closure, with a claimed Lipschitz bound."""

    domain: sp.NormedSpace
    codomain: Optional[sp.NormedSpace]  # None for scalar-valued maps
    fn: Callable
    lipschitz_bound: float
    certificate: str = SAMPLED
    batch: Optional[Callable] = None  # vectorized fn over rows, when available

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.fn(x)
        if self.batch is not None:
            return self.batch(x)
        return np.array([self.fn(r) for r in x])

    def out_norm(self, V):
        if self.codomain is None:
            return np.abs(np.asarray(V, dtype=float)).reshape(len(V), -1).max(axis=1)
        return sp.norm(self.codomain, V)

    def max_quotient(self, pairs=10_000, seed=0, scale=2.0):
        """Largest sampled difference quotient."""
        rng = np.random.default_rng(seed)
        n = self.domain.dim
        X = scale * rng.standard_normal((pairs, n))
        r = np.exp(rng.uniform(np.log(1e-4), np.log(4 * scale), pairs))
        Y = X + r[:, None] * sp.sample_sphere(self.domain, pairs, seed + 1)
        num = self.out_norm(self(X) - self(Y))
        return float(np.max(num / sp.norm(self.domain, X - Y)))


def callable_radius_sampled(S, budget=2000, seed=0, scale=2.0):
    """Two-point lower bound for the numerical radius of a self-map given as a callable."""
    X = S.domain
    rng = np.random.default_rng(seed)
    P = scale * rng.standard_normal((budget, X.dim))
    r = np.exp(rng.uniform(np.log(1e-3), np.log(2 * scale), budget))
    Q = P + r[:, None] * sp.sample_sphere(X, budget, seed + 1)
    V = apply(S, P) - apply(S, Q)
    vals = sp.face_sup_batch(X, P - Q, V) / sp.norm(X, P - Q)
    return float(np.max(vals))


def callable_lip_sampled(S, budget=2000, seed=0, scale=2.0):
    X = S.domain
    rng = np.random.default_rng(seed)
    P = scale * rng.standard_normal((budget, X.dim))
    r = np.exp(rng.uniform(np.log(1e-3), np.log(2 * scale), budget))
    Q = P + r[:, None] * sp.sample_sphere(X, budget, seed + 1)
    return float(np.max(sp.norm(X, apply(S, P) - apply(S, Q)) / sp.norm(X, P - Q)))


# ---------------------------------------------------------------------------
# extension from a segment


def mcshane_extend(x1, x2, space):
    """1-Lipschitz extension of z -> ||z - x1|| from the segment [x1, x2].

    f(x) = min over t in [0, 1] of t*||x2 - x1|| + ||x - (x1 + t(x2 - x1))||.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    a = float(sp.norm(space, x2 - x1))
    if a == 0:
        raise InputError("x1 and x2 must differ")
    d = x2 - x1

    def f(x):
        x = np.asarray(x, dtype=float)
        if np.array_equal(x, x1):
            return 0.0
        if np.array_equal(x, x2):
            return a
        _, val = golden_section(lambda t: t * a + float(sp.norm(space, x - x1 - t * d)), 0.0, 1.0,
                                tol=1e-10)
        return val

    def fb(P):
        # the same golden-section search, run on all rows at once
        P = np.asarray(P, dtype=float)
        obj = lambda t: t * a + sp.norm(space, P - x1 - t[:, None] * d)  # noqa: E731
        lo, hi = np.zeros(len(P)), np.ones(len(P))
        c, e = hi - INVPHI * (hi - lo), lo + INVPHI * (hi - lo)
        fc, fe = obj(c), obj(e)
        while np.max(hi - lo) > 1e-10:
            left = fc <= fe
            hi = np.where(left, e, hi)
            lo = np.where(left, lo, c)
            c_new = np.where(left, hi - INVPHI * (hi - lo), e)
            e_new = np.where(left, c, lo + INVPHI * (hi - lo))
            c, e = c_new, e_new
            fc, fe = obj(c), obj(e)
        best = np.minimum(np.minimum(fc, fe), np.minimum(obj(np.zeros(len(P))), obj(np.ones(len(P)))))
        best[np.all(P == x1, axis=1)] = 0.0
        best[np.all(P == x2, axis=1)] = a
        return best

    return LipschitzCallable(space, None, f, 1.0, batch=fb)


def segment_extension(x1, x2, y1, y2, M, space, target=None):
    """M-Lipschitz F with F(x1) = y1 and F(x2) = y2, built as phi o pi_a o f.

    ``space`` is the domain, ``target`` the codomain (used only for the
    hypothesis check; defaults to ``space`` when dimensions agree, else l2).
    """
    x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
    y1, y2 = np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
    if target is None:
        target = space if y1.shape == (space.dim,) else sp.lp(y1.size, 2.0)
    a = float(sp.norm(space, x1 - x2))
    gap = float(sp.norm(target, y1 - y2))
    if a == 0:
        raise InputError("x1 and x2 must differ")
    if gap > M * a * (1 + 1e-12):
        raise InputError(f"extension hypothesis ||y1 - y2|| <= M ||x1 - x2|| fails: {gap} > {M} * {a}")
    f = mcshane_extend(x1, x2, space)

    def F(x):
        s = min(max(f(x), 0.0), a)  # pi_a on the nonnegative values of f
        return (s / a) * y2 + (1 - s / a) * y1

    def Fexact(x):
        x = np.asarray(x, dtype=float)
        if np.array_equal(x, x1):
            return y1.copy()
        if np.array_equal(x, x2):
            return y2.copy()
        return F(x)

    def Fb(P):
        s = np.clip(f(P), 0.0, a)[:, None]
        out = (s / a) * y2 + (1 - s / a) * y1
        out[np.all(P == x1, axis=1)] = y1
        out[np.all(P == x2, axis=1)] = y2
        return out

    return LipschitzCallable(space, target, Fexact, float(M), batch=Fb)


# ---------------------------------------------------------------------------
# midpoint join


@dataclass
class SphereSet:
    """A = S_X."""

    space: sp.NormedSpace

    def decompose(self, z0, eps):
        return z0, z0, 0.0


@dataclass
class ProductSet:
    """A = S_X x B_Y inside X (+)_inf Y (``left=True``) or B_X x S_Y."""

    space: sp.NormedSpace
    left: bool = True

    def decompose(self, z0, eps):
        Z = self.space
        a, b = Z.split(z0)
        comp = Z.left if self.left else Z.right
        main = a if self.left else b
        m = float(sp.norm(comp, main))
        if m > 0:
            hat = main / m
        else:
            hat = sp.sample_sphere(comp, 1, 0)[0]
        other = b if self.left else a

        def build(v):
            return np.concatenate([v, other]) if self.left else np.concatenate([other, v])

        # z0 = lam * (-hat, other) + (1 - lam) * (hat, other) with lam = (1 - m)/2
        return build(-hat), build(hat), (1.0 - m) / 2.0


@dataclass
class VertexSet:
    space: sp.NormedSpace
    points: np.ndarray

    def decompose(self, z0, eps):
        P = np.atleast_2d(self.points)
        best = (np.inf, None)
        for i, j in itertools.product(range(len(P)), repeat=2):
            lam, dist = golden_section(
                lambda t: float(sp.norm(self.space, z0 - t * P[i] - (1 - t) * P[j])), 0.0, 0.5)
            if dist < best[0]:
                best = (dist, (P[i], P[j], lam))
        if best[0] >= eps:
            raise NotFoundError(f"no pair of listed points comes within {eps} of the target "
                                f"(best distance {best[0]:.3g})", best=best)
        return best[1]


@dataclass
class SliceUnion:
    """A = S(y*, eps) union -S(y*, eps) (real spaces)."""

    space: sp.NormedSpace
    ystar: np.ndarray
    eps: float

    def decompose(self, z0, eps):
        res = _best_combination(self.space, z0, np.asarray(self.ystar, float), self.eps, None)
        if res is None or res[0] >= eps:
            raise NotFoundError("target is not within eps of the join of the slice union",
                                best=res)
        _, x1, x2, lam, a1, a2 = res
        p1, p2 = a1 * x1, a2 * x2
        if lam > 0.5:
            p1, p2, lam = p2, p1, 1 - lam
        return p1, p2, lam


def midpoint_join(x, y, A, eps=1e-9):
    """Point z with z - x in (||x - y||/2)(-A) and ||y - z|| <= (1 + eps)||x - y||/2.

    Decomposes z0 = (x - y)/||x - y|| as lam*x1 + (1 - lam)*x2 with lam <= 1/2
    and returns z = x - (||x - y||/2) x2.
    """
    space = A.space
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = float(sp.norm(space, x - y))
    if r == 0:
        raise InputError("x and y must differ")
    z0 = (x - y) / r
    x1, x2, lam = A.decompose(z0, eps)
    if lam > 0.5:
        x1, x2, lam = x2, x1, 1 - lam
    z = x - (r / 2) * np.asarray(x2)
    if float(sp.norm(space, y - z)) > (1 + eps) * r / 2 * (1 + 1e-12) + 1e-15:
        raise NotFoundError("decomposition does not give the required bound", best=(x1, x2, lam))
    return z


# ---------------------------------------------------------------------------
# lush witnesses


@dataclass
class LushWitness:
    ystar: np.ndarray
    epsilon: float
    x1: np.ndarray
    x2: np.ndarray
    lam: float
    alphas: tuple
    achieved_distance: float

    def verify(self, space, x, y):
        """Residuals of the slice and distance conditions (all must be > 0)."""
        t = 1 - self.epsilon
        comb = self.lam * self.alphas[0] * self.x1 + (1 - self.lam) * self.alphas[1] * self.x2
        return {
            "y_in_slice": float(sp.pair(self.ystar, y) - t),
            "x1_in_slice": float(sp.pair(self.ystar, self.x1) - t),
            "x2_in_slice": float(sp.pair(self.ystar, self.x2) - t),
            "x1_in_ball": float(1 + 1e-12 - sp.norm(space, self.x1)),
            "x2_in_ball": float(1 + 1e-12 - sp.norm(space, self.x2)),
            "distance": float(self.epsilon - sp.norm(space, x - comb)),
        }


@dataclass
class NotFound:
    """Failed search (never a proof of absence)."""

    reason: str
    best_distance: float
    explored: int


def _polyhedral_rows(space):
    if space.is_complex:
        return None
    return sp.dual_ball_extreme_points(space)


def _best_combination(space, x, ystar, eps, y):
    """min over lam, alphas and slice members of ||x - (lam a1 x1 + (1 - lam) a2 x2)||."""
    n = space.dim
    level = 1 - eps + 1e-9 * eps
    Phi = _polyhedral_rows(space)
    best = None
    for a1, a2 in itertools.product((1.0, -1.0), repeat=2):
        if Phi is not None:
            sol = _lp_combination(Phi, x, ystar, level, a1, a2)
        else:
            sol = _nlp_combination(space, x, ystar, level, a1, a2)
        if sol is None:
            continue
        p, q, lam = sol
        x1 = a1 * p / lam if lam > 1e-12 else y
        x2 = a2 * q / (1 - lam) if lam < 1 - 1e-12 else y
        if x1 is None or x2 is None:
            continue
        ok = all(float(sp.pair(ystar, v)) > 1 - eps and float(sp.norm(space, v)) <= 1 + 1e-12
                 for v in (x1, x2))
        if not ok:
            continue
        dist = float(sp.norm(space, x - (lam * a1 * x1 + (1 - lam) * a2 * x2)))
        if best is None or dist < best[0]:
            best = (dist, x1, x2, lam, a1, a2)
    return best


def _lp_combination(Phi, x, ystar, level, a1, a2):
    n = x.size
    m = len(Phi)
    # variables: p (n), q (n), lam, t
    rows, rhs = [], []
    Z = np.zeros((m, n))
    one = np.ones((m, 1))
    zc = np.zeros((m, 1))
    rows.append(np.hstack([a1 * Phi, Z, -one, zc]))
    rhs.append(np.zeros(m))
    rows.append(np.hstack([Z, a2 * Phi, one, zc]))
    rhs.append(np.ones(m))
    rows.append(np.hstack([-a1 * ystar, np.zeros(n), [level], [0.0]])[None, :])
    rhs.append([0.0])
    rows.append(np.hstack([np.zeros(n), -a2 * ystar, [-level], [0.0]])[None, :])
    rhs.append([-level])
    rows.append(np.hstack([-Phi, -Phi, zc, -one]))
    rhs.append(-Phi @ x)
    c = np.zeros(2 * n + 2)
    c[-1] = 1.0
    bounds = [(None, None)] * (2 * n) + [(0.0, 1.0), (0.0, None)]
    res = linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        return None
    v = res.x
    return v[:n], v[n:2 * n], float(v[2 * n])


def _nlp_combination(space, x, ystar, level, a1, a2):
    n = x.size
    nrm = lambda v: float(sp.norm(space, v))  # noqa: E731
    cons = [
        {"type": "ineq", "fun": lambda v: v[2 * n] - nrm(a1 * v[:n])},
        {"type": "ineq", "fun": lambda v: (1 - v[2 * n]) - nrm(a2 * v[n:2 * n])},
        {"type": "ineq", "fun": lambda v: a1 * ystar @ v[:n] - level * v[2 * n]},
        {"type": "ineq", "fun": lambda v: a2 * ystar @ v[n:2 * n] - level * (1 - v[2 * n])},
    ]
    best = None
    g = ystar / max(nrm(ystar), 1e-300)
    for lam0 in (0.0, 0.5, 1.0):
        v0 = np.concatenate([a1 * lam0 * g, a2 * (1 - lam0) * g, [lam0]])
        res = minimize(lambda v: nrm(x - v[:n] - v[n:2 * n]), v0, method="SLSQP", constraints=cons,
                       bounds=[(None, None)] * (2 * n) + [(0.0, 1.0)],
                       options={"maxiter": 300, "ftol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
    v = best.x
    lam = float(np.clip(v[2 * n], 0.0, 1.0))
    p, q = v[:n], v[n:2 * n]
    # pull p, q back into the feasible set to absorb solver slack
    for arr, a, w in ((p, a1, lam), (q, a2, 1 - lam)):
        nr = nrm(arr)
        if w > 0 and nr > w:
            arr *= w / nr
    return p, q, lam


def _functional_candidates(space, y, eps, budget, seed):
    cands = []
    G = _polyhedral_rows(space)
    if G is not None:
        cands.append(G)
    else:
        dual_p = 1.0 / (1.0 - 1.0 / space.p) if space.kind == "pnorm" and 1 < space.p < np.inf else None
        if dual_p is not None:
            dual = sp.lp(space.dim, dual_p)
            if space.dim == 2:
                th = np.linspace(0, 2 * np.pi, max(budget, 8), endpoint=False)
                U = np.column_stack([np.cos(th), np.sin(th)])
                cands.append(U / sp.norm(dual, U)[:, None])
            else:
                cands.append(sp.sample_sphere(dual, max(budget, 8), seed))
    cands.append(sp.duality_set(space, y).representative()[None, :] / sp.norm(space, y))
    C = np.vstack(cands)
    C = C / sp.dual_norm(space, C)[:, None]
    return C[(C @ y) > 1 - eps]


def lush_witness(space, x, y, eps, budget=64, seed=0):
    """Search for a slice S(y*, eps) containing y with x within eps of its join-lush hull."""
    if space.is_complex:
        raise InputError("lush_witness is implemented for real spaces")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for v, name in ((x, "x"), (y, "y")):
        if abs(float(sp.norm(space, v)) - 1) > 1e-9:
            raise InputError(f"{name} must be a unit vector")
    C = _functional_candidates(space, y, eps, budget, seed)
    best_dist, explored = np.inf, 0
    for ystar in C[:max(budget, 1) if _polyhedral_rows(space) is None else None]:
        explored += 1
        res = _best_combination(space, x, ystar, eps, y)
        if res is None:
            continue
        dist, x1, x2, lam, a1, a2 = res
        best_dist = min(best_dist, dist)
        if dist < eps:
            return LushWitness(ystar, eps, x1, x2, lam, (a1, a2), dist)
    return NotFound("no slice within the explored functionals brings x within eps", best_dist, explored)


# ---------------------------------------------------------------------------
# C(K)-style witness boost on l_inf^n


def ck_witness_boost(space, T, x, y, eps):
    """From an almost-norming pair, a two-point radius witness of value > (1 - 2 eps)||T||_L.

    Returns (z, s, g, value) with g a norm-one functional in D(v) for
    v = (z - x)/||z - x||, so value = |g(Tz - Tx)|/||z - x|| is a numerical
    range value of T.
    """
    if not (space.kind == "pnorm" and np.isinf(space.p)) or space.is_complex:
        raise InputError("ck_witness_boost needs a real l_inf^n space")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = x - y
    nu = float(sp.norm(space, u))
    if nu == 0:
        raise InputError("x and y must differ")
    L = lip_constant(T)
    dT = apply(T, x) - apply(T, y)
    good = np.abs(dT) > (1 - eps) * L * nu
    if not good.any():
        raise InputError("precondition ||Tx - Ty|| > (1 - eps)||T||_L ||x - y|| fails")
    usable = good & (u != 0)
    if not usable.any():
        # nudge x on an attaining coordinate so that u(s) != 0
        s = int(np.argmax(np.abs(dT)))
        x = x.copy()
        x[s] += 1e-6 * eps * nu
        return ck_witness_boost(space, T, x, y, eps)
    cand = np.flatnonzero(usable)
    s = int(cand[np.argmax(np.abs(dT[cand]))])
    v = -u / np.maximum(np.abs(u), abs(u[s]))
    z = x + (nu / 2) * v
    g = np.zeros(space.dim)
    g[s] = np.sign(v[s])  # g(v) = |v(s)| = 1, so g lies in D(v)
    dzx = float(sp.norm(space, z - x))
    dzy = float(sp.norm(space, z - y))
    if abs(dzx - nu / 2) > 1e-9 * max(1, nu) or abs(dzy - nu / 2) > 1e-9 * max(1, nu):
        raise AssertionError("midpoint identities failed")  # pragma: no cover
    value = abs(float(g @ (apply(T, z) - apply(T, x)))) / dzx
    return z, s, g, value


# ---------------------------------------------------------------------------
# sums


def _component_rows(Z, left):
    return slice(0, Z.left.dim) if left else slice(Z.left.dim, Z.dim)


def _component(Z, left):
    return Z.left if left else Z.right


def _norming_pairs(T, Z, rows, comp, budget, seed):
    """Candidate pairs (u, w) maximizing ||T_c u - T_c w|| / ||u - w|| for a component map T_c."""
    out = []
    if isinstance(T, LinearOperator):
        M = T.matrix[rows]
        res = sp.maximize_over_strata(Z, lambda U: sp.norm(comp, U @ M.T), samples=256, seed=seed)
        out.append((res.point, np.zeros(Z.dim)))
    elif isinstance(T, PwlOperator):
        centers, radii = T.centers
        for k, (c, rho) in enumerate(zip(centers, radii)):
            if rho <= 0:
                continue
            M = T.cells[k].A[rows]
            res = sp.maximize_over_strata(Z, lambda U: sp.norm(comp, U @ M.T), samples=128, seed=seed)
            d = res.point
            out.append((c + 0.5 * rho * d / np.linalg.norm(d), c))
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((budget, Z.dim))
    Q = P + np.exp(rng.uniform(-4, 1, budget))[:, None] * sp.sample_sphere(Z, budget, seed + 1)
    num = sp.norm(comp, (apply(T, P) - apply(T, Q))[:, rows])
    q = num / sp.norm(Z, P - Q)
    i = int(np.argmax(q))
    out.append((P[i], Q[i]))
    return out


def linf_witness_align(T, eps=1e-3, budget=2000, seed=0, left=True, lipschitz=None):
    """Pair (u, v) in X (+)_inf Y with ||u - v|| = ||x_u - x_v|| and a large component quotient.

    The component of T onto the summand selected by ``left`` must have
    Lipschitz constant equal to ||T||_L (pass ``lipschitz`` to override); the
    pair satisfies ||T u - T v|| >= (||T||_L - eps)||u - v||.
    """
    Z = domain_of(T)
    if Z.kind != "sum" or Z.sum_kind != "linf":
        raise InputError("linf_witness_align needs an operator on an l_inf-sum")
    L = lip_constant(T) if lipschitz is None else lipschitz
    rows = _component_rows(Z, left)
    comp = _component(Z, left)
    best = None
    for u, w in _norming_pairs(T, Z, rows, comp, budget, seed):
        duw = float(sp.norm(Z, u - w))
        if duw == 0:
            continue
        q = float(sp.norm(comp, (apply(T, u) - apply(T, w))[rows])) / duw
        if best is None or q > best[0]:
            best = (q, u, w)
    q, u, w = best
    if q < L - eps / 2:
        raise NotFoundError(f"best sampled quotient {q:.6g} is below ||T||_L - eps/2", best=(u, w))
    v = midpoint_join(u, w, ProductSet(Z, left))
    d = u - v
    dz = float(sp.norm(Z, d))
    dx = float(sp.norm(comp, d[rows]))
    full = float(sp.norm(Z, apply(T, u) - apply(T, v))) / dz
    if abs(dz - dx) > 1e-9 * max(1.0, dz) or full < L - eps - 1e-12:
        raise NotFoundError("aligned pair failed re-verification", best=(u, v))
    return u, v


def linf_sum_compress(T, u, v, left=True):
    """S(x) = T_1(x, F(x)) - T_1(0, F(0)) on the summand X, with F extending x_i -> y_i."""
    Z = domain_of(T)
    X, Y = (Z.left, Z.right) if left else (Z.right, Z.left)
    rows = _component_rows(Z, left)
    u, v = np.asarray(u, float), np.asarray(v, float)

    def parts(z):
        a, b = Z.split(z)
        return (a, b) if left else (b, a)

    x1, y1 = parts(u)
    x2, y2 = parts(v)
    if np.array_equal(x1, x2):
        raise InputError("aligned pair must have different summand components")
    if float(sp.norm(Y, y1 - y2)) > float(sp.norm(X, x1 - x2)) * (1 + 1e-12):
        raise InputError("aligned pair violates ||y1 - y2|| <= ||x1 - x2||")
    F = segment_extension(x1, x2, y1, y2, 1.0, X, Y)

    def join(x, y):
        return np.concatenate([x, y]) if left else np.concatenate([y, x])

    base = apply(T, join(np.zeros(X.dim), F(np.zeros(X.dim))))[rows]

    def S(x):
        return apply(T, join(x, F(x)))[rows] - base

    return LipschitzCallable(X, X, S, lip_constant(T))


def l1_sum_compress(T, z1, z2, eps, left=True):
    """S(x) = A(x) + y*(Bx) x0 on the summand X, frozen at the other summand of z2.

    Returns ``(S, side)``; ``side`` names the summand actually used, which is
    the other one when only the second branch of the dichotomy holds.
    """
    Z = domain_of(T)
    if Z.kind != "sum" or Z.sum_kind != "l1":
        raise InputError("l1_sum_compress needs an operator on an l1-sum")
    z1, z2 = np.asarray(z1, float), np.asarray(z2, float)
    L = lip_constant(T)
    xa1, xb1 = Z.split(z1)
    xa2, xb2 = Z.split(z2)
    # branch for the left summand: ||T(x1, y2) - T(x2, y2)|| >= (1 - eps) L ||x1 - x2||
    left_gap = float(sp.norm(Z.left, xa1 - xa2))
    right_gap = float(sp.norm(Z.right, xb1 - xb2))
    gl = float(sp.norm(Z, apply(T, np.concatenate([xa1, xb2])) - apply(T, np.concatenate([xa2, xb2]))))
    gr = float(sp.norm(Z, apply(T, np.concatenate([xa1, xb1])) - apply(T, np.concatenate([xa1, xb2]))))
    ok_left = left_gap > 0 and gl >= (1 - eps) * L * left_gap
    ok_right = right_gap > 0 and gr >= (1 - eps) * L * right_gap
    order = [True, False] if left else [False, True]
    for side in order:
        if side and ok_left:
            return _l1_compress_side(T, Z, xa1, xa2, xb2, True), "left"
        if not side and ok_right:
            return _l1_compress_side(T, Z, xb2, xb1, xa1, False), "right"
    raise InputError("neither branch of the l1 dichotomy holds for this pair; supply a better witness")


def _l1_compress_side(T, Z, p1, p2, frozen, left):
    X, Y = (Z.left, Z.right) if left else (Z.right, Z.left)
    rx, ry = _component_rows(Z, left), _component_rows(Z, not left)

    def join(x, y):
        return np.concatenate([x, y]) if left else np.concatenate([y, x])

    base = apply(T, join(np.zeros(X.dim), frozen))

    def Tf(x):
        return apply(T, join(x, frozen)) - base

    d = Tf(p1) - Tf(p2)
    dA, dB = d[rx], d[ry]
    nA = float(sp.norm(X, dA))
    # x0 aligns A's increment and y* norms B's; any unit choice works when they vanish
    x0 = dA / nA if nA > 0 else sp.ball_extreme_points(X)[0] if sp.has_finite_extremes(X) else _unit(X)
    if float(sp.norm(Y, dB)) > 0:
        ystar = sp.duality_set(Y, dB).representative() / float(sp.norm(Y, dB))
    else:
        e = _unit(Y)
        ystar = sp.duality_set(Y, e).representative()

    def S(x):
        v = Tf(x)
        return v[rx] + float(np.real(ystar @ v[ry])) * x0

    return LipschitzCallable(X, X, S, lip_constant(T))


def _unit(space):
    e = np.zeros(space.dim)
    e[0] = 1.0
    return e / float(sp.norm(space, e))


# ---------------------------------------------------------------------------
# diagonal lift


def diagonal_lift(S, n, max_cells=4096):
    """T(x_1, ..., x_n) = (S x_1, ..., S x_n) on the l1-sum of n copies of the domain."""
    if n < 1:
        raise InputError("n must be >= 1")
    K = len(S.cells)
    if K ** n > max_cells:
        raise GenerationError(f"{K}^{n} product cells exceed the limit {max_cells}")
    X = S.space
    Z = sp.power(X, n, "l1")
    d = X.dim
    cells = []
    for combo in itertools.product(S.cells, repeat=n):
        C = np.zeros((sum(c.C.shape[0] for c in combo), n * d))
        dd, A, b = [], np.zeros((n * d, n * d)), []
        r = 0
        for k, c in enumerate(combo):
            C[r:r + c.C.shape[0], k * d:(k + 1) * d] = c.C
            r += c.C.shape[0]
            dd.append(c.d)
            A[k * d:(k + 1) * d, k * d:(k + 1) * d] = c.A
            b.append(c.b)
        cells.append(Cell(C, np.concatenate(dd), A, np.concatenate(b)))
    return PwlOperator(Z, tuple(cells), S.box_radius)
