"""Continuous piecewise-linear (CPWL) Lipschitz maps fixing the origin.

A map is stored as a finite list of polyhedral cells {x : Cx <= d}, each
carrying an affine piece x -> Ax + b. Cells are closed, may be unbounded
(the outermost ones continue beyond the box of radius ``box_radius`` along
their recession directions) and together cover the whole space.
"""

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from . import linop
from . import spaces as sp
from .errors import DomainError, GenerationError, InputError
from .linop import CELL_SUP, LinearOperator, RadiusBracket, Witness

FACET_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Cell:
    C: np.ndarray
    d: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        n = A.shape[1]
        if C.size == 0:
            C, d = np.zeros((0, n)), np.zeros(0)
        if C.shape[1] != n or d.shape != (C.shape[0],) or A.shape != (n, n) or b.shape != (n,):
            raise InputError(f"inconsistent cell shapes C{C.shape} d{d.shape} A{A.shape} b{b.shape}")
        for name, arr in (("C", C), ("d", d), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"cell {name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self):
        return self.A.shape[0]

    def slack(self, X):
        """d - Cx for each row of X (nonnegative inside)."""
        return self.d - np.atleast_2d(X) @ self.C.T

    def contains(self, X, tol=FACET_TOL):
        X = np.atleast_2d(X)
        scale = 1.0 + np.abs(self.d) + np.abs(X) @ np.abs(self.C).T
        return np.all(self.slack(X) >= -tol * scale, axis=-1)

    def interior(self, X, tol=FACET_TOL):
        X = np.atleast_2d(X)
        scale = 1.0 + np.abs(self.d) + np.abs(X) @ np.abs(self.C).T
        return np.all(self.slack(X) > tol * scale, axis=-1)

    def apply(self, X):
        return np.atleast_2d(X) @ self.A.T + self.b

    def chebyshev(self, box):
        """Center and radius of the largest Euclidean ball inside the cell and the box."""
        n = self.dim
        rows = np.vstack([self.C, np.eye(n), -np.eye(n)])
        rhs = np.concatenate([self.d, np.full(2 * n, box)])
        norms = np.linalg.norm(rows, axis=1)
        A_ub = np.hstack([rows, norms[:, None]])
        c = np.zeros(n + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=A_ub, b_ub=rhs, bounds=[(None, None)] * n + [(0, box)],
                      method="highs")
        if res.status != 0:
            return np.zeros(n), -1.0
        return res.x[:n], float(res.x[-1])


@dataclass(frozen=True)
class NonSmooth:
    """Marker returned when a point sits on a facet between cells with different pieces."""

    point: np.ndarray
    cells: tuple


@dataclass(frozen=True, eq=False)
class PwlOperator:
    space: sp.NormedSpace
    cells: tuple
    box_radius: float = 1.0

    def __post_init__(self):
        if self.space.is_complex:
            raise InputError("piecewise-linear operators are defined on real spaces only")
        cells = tuple(self.cells)
        if not cells:
            raise InputError("at least one cell is required")
        for c in cells:
            if c.dim != self.space.dim:
                raise InputError(f"cell dimension {c.dim} does not match space dimension {self.space.dim}")
        if not self.box_radius > 0:
            raise InputError("box_radius must be positive")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "box_radius", float(self.box_radius))

    def __call__(self, x):
        return eval_pwl(self, x)

    @cached_property
    def centers(self):
        """Chebyshev centers and inradii of the cells within the box."""
        out = [c.chebyshev(self.box_radius) for c in self.cells]
        return np.array([o[0] for o in out]), np.array([o[1] for o in out])

    def linear_pieces(self):
        return [LinearOperator(self.space, c.A) for c in self.cells]


# ---------------------------------------------------------------------------
# constructors


def from_linear(space, A, box_radius=1.0):
    n = space.dim
    return PwlOperator(space, (Cell(np.zeros((0, n)), np.zeros(0), A, np.zeros(n)),), box_radius)


def abs_map(space=None):
    """x -> |x| on the real line."""
    space = space or sp.real_line()
    return PwlOperator(space, (Cell([[1.0]], [0.0], [[-1.0]], [0.0]),
                               Cell([[-1.0]], [0.0], [[1.0]], [0.0])), 1.0)


def relu(space=None):
    space = space or sp.real_line()
    return PwlOperator(space, (Cell([[1.0]], [0.0], [[0.0]], [0.0]),
                               Cell([[-1.0]], [0.0], [[1.0]], [0.0])), 1.0)


def clamp_map(space, c=1.0):
    """Coordinatewise clamp to [-c, c] (3^n cells)."""
    n = space.dim
    cells = []
    for state in itertools.product((-1, 0, 1), repeat=n):
        C, d, diag, b = [], [], np.zeros(n), np.zeros(n)
        for k, s in enumerate(state):
            e = np.eye(n)[k]
            if s == -1:
                C.append(e), d.append(-c)
                b[k] = -c
            elif s == 1:
                C.append(-e), d.append(-c)
                b[k] = c
            else:
                C += [e, -e]
                d += [c, c]
                diag[k] = 1.0
        cells.append(Cell(np.array(C), np.array(d), np.diag(diag), b))
    return PwlOperator(space, tuple(cells), 2.0 * c)


# ---------------------------------------------------------------------------
# evaluation


def _check_points(T, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (T.space.dim,):
        raise InputError(f"point has length {x.shape[-1] if x.ndim else 0}, space dimension is {T.space.dim}")
    return x


def locate(T, X, tol=FACET_TOL):
    """Index of the first cell containing each row of X, -1 where none does."""
    X = np.atleast_2d(X)
    idx = np.full(X.shape[0], -1)
    for k, c in enumerate(T.cells):
        hit = (idx < 0) & c.contains(X, tol)
        idx[hit] = k
    return idx


def eval_pwl(T, x):
    """Evaluate T at a point or a batch of points (rows)."""
    x = _check_points(T, x)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    idx = locate(T, X)
    if np.any(idx < 0):
        bad = X[np.flatnonzero(idx < 0)[0]]
        raise DomainError(f"point {bad.tolist()} is not covered by any cell")
    out = np.empty_like(X)
    for k in np.unique(idx):
        m = idx == k
        out[m] = T.cells[k].apply(X[m])
    out[np.all(X == 0, axis=1)] = 0.0
    return out[0] if single else out


def gateaux_derivative(T, x):
    """The derivative at x as a LinearOperator, or NonSmooth on a kink."""
    x = _check_points(T, x)
    hits = [k for k, c in enumerate(T.cells) if c.contains(x)[0]]
    if not hits:
        raise DomainError(f"point {x.tolist()} is not covered by any cell")
    A0 = T.cells[hits[0]].A
    if all(np.allclose(T.cells[k].A, A0, rtol=0, atol=1e-12) for k in hits[1:]):
        return LinearOperator(T.space, A0)
    return NonSmooth(x, tuple(hits))


# ---------------------------------------------------------------------------
# validation


@dataclass
class Failure:
    kind: str  # "degenerate" | "coverage" | "overlap" | "continuity" | "origin"
    message: str
    witness: Optional[np.ndarray] = None


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)
    checked_points: int = 0

    @property
    def ok(self):
        return not self.failures

    def kinds(self):
        return sorted({f.kind for f in self.failures})


def _grid_points(n, R, total=2000):
    g = max(2, int(round(total ** (1.0 / n))))
    axis = np.linspace(-R, R, g)
    return np.array(list(itertools.product(axis, repeat=n)))


def _intersection_points(ci, cj, box, n_random=2, rng=None):
    """Points of the (box-clipped) intersection of two cells spanning its affine hull."""
    n = ci.dim
    rows = np.vstack([ci.C, cj.C])
    rhs = np.concatenate([ci.d, cj.d])
    objs = [e for k in range(n) for e in (np.eye(n)[k], -np.eye(n)[k])]
    if rng is not None:
        objs += list(rng.standard_normal((n_random, n)))
    pts = []
    for c in objs:
        res = linprog(c, A_ub=rows if rows.size else None, b_ub=rhs if rows.size else None,
                      bounds=[(-box, box)] * n, method="highs")
        if res.status == 2:
            return np.zeros((0, n))
        if res.status == 0:
            pts.append(res.x)
    return np.array(pts)


def validate(T, seed=0, n_random=500):
    """Check coverage, disjoint interiors, continuity and T(0) = 0; failures are data."""
    rep = ValidationReport()
    n, R = T.space.dim, T.box_radius
    centers, radii = T.centers
    for k, r in enumerate(radii):
        if r <= 1e-9:
            rep.failures.append(Failure("degenerate", f"cell {k} has empty interior in the box", None))
    rng = np.random.default_rng(seed)
    P = np.vstack([_grid_points(n, R), rng.uniform(-R, R, (n_random, n)),
                   4 * R * sp.sample_sphere(sp.lp(n, np.inf), 64, seed + 1)])
    rep.checked_points = len(P)
    idx = locate(T, P)
    for i in np.flatnonzero(idx < 0)[:5]:
        rep.failures.append(Failure("coverage", f"point {P[i].tolist()} lies in no cell", P[i]))
    inside = np.array([c.interior(P) for c in T.cells])
    multi = np.flatnonzero(inside.sum(axis=0) > 1)
    for i in multi[:5]:
        ks = np.flatnonzero(inside[:, i]).tolist()
        rep.failures.append(Failure("overlap", f"point {P[i].tolist()} is interior to cells {ks}", P[i]))
    box = 2 * R
    for i, j in itertools.combinations(range(len(T.cells)), 2):
        ci, cj = T.cells[i], T.cells[j]
        pts = _intersection_points(ci, cj, box, rng=rng)
        if not len(pts):
            continue
        gap = ci.apply(pts) - cj.apply(pts)
        scale = 1.0 + np.abs(ci.apply(pts)) + np.abs(cj.apply(pts))
        bad = np.max(np.abs(gap) / scale, axis=1)
        if bad.max() > FACET_TOL:
            w = pts[int(np.argmax(bad))]
            rep.failures.append(Failure("continuity",
                                        f"cells {i} and {j} disagree by {bad.max():.3g} on their common boundary",
                                        w))
    zero = np.zeros(n)
    for k, c in enumerate(T.cells):
        if c.contains(zero)[0] and np.any(np.abs(c.b) > 1e-12):
            rep.failures.append(Failure("origin", f"cell {k} contains 0 but has offset {c.b.tolist()}", zero))
    return rep


# ---------------------------------------------------------------------------
# norms and radii


def lip_norm(T, samples=256, seed=0):
    """Lipschitz constant: the largest operator norm among the linear pieces."""
    return max(linop.op_norm(L, samples, seed) for L in T.linear_pieces())


def _directions(space, count, seed):
    st = sp.strata(space)
    if all(s.finite for s in st):
        return np.vstack([s.points for s in st])
    return sp.sample_sphere(space, count, seed)


def _pair_quotients(T, X, Y):
    dX = sp._norm(T.space, X - Y)
    dT = sp._norm(T.space, eval_pwl(T, X) - eval_pwl(T, Y))
    return dT / dX


def lip_norm_sampled(T, r=1.0, budget=2000, seed=0):
    """Largest sampled difference quotient over pairs at distance at most r (a lower bound).

    Random pairs are followed by a local pass: at an interior point of each
    cell, steps along ball extreme directions (or optimized directions for
    smooth norms) short enough to stay inside the cell.
    """
    if not r > 0:
        raise InputError("r must be positive")
    X = T.space
    rng = np.random.default_rng(seed)
    n, R = X.dim, T.box_radius
    P = rng.uniform(-1.2 * R, 1.2 * R, (budget, n))
    U = sp.sample_sphere(X, budget, seed + 1)
    s = r * rng.uniform(0.01, 1.0, budget)
    best = float(np.max(_pair_quotients(T, P, P + s[:, None] * U)))
    centers, radii = T.centers
    for k, (c, rho) in enumerate(zip(centers, radii)):
        if rho <= 0:
            continue
        A = T.cells[k].A
        D = _directions(X, 64, seed + 2 + k)
        if not all(st.finite for st in sp.strata(X)):
            res = sp.maximize_over_strata(X, lambda Z: sp._norm(X, Z @ A.T), samples=128,
                                          refine=2, seed=seed + k)
            D = np.vstack([D, res.point[None, :]])
        step = np.minimum(r, 0.5 * rho / np.linalg.norm(D, axis=1))
        Y = c + step[:, None] * D
        best = max(best, float(np.max(_pair_quotients(T, np.repeat(c[None, :], len(D), 0), Y))))
    return best


def _two_point_values(T, X, Y):
    V = eval_pwl(T, X) - eval_pwl(T, Y)
    Dx = X - Y
    nd = sp._norm(T.space, Dx)
    return sp.face_sup_batch(T.space, Dx, V) / nd


def lip_radius_sampled(T, budget=2000, seed=0, local=True):
    """Lower bound from two-point samples |f(Tx - Ty)|/||x - y||^2, f in D(x - y); with witness."""
    X = T.space
    rng = np.random.default_rng(seed)
    n, R = X.dim, T.box_radius
    P = rng.uniform(-1.2 * R, 1.2 * R, (budget, n))
    scale = R * np.exp(rng.uniform(np.log(1e-3), np.log(2.0), budget))
    Q = P + scale[:, None] * sp.sample_sphere(X, budget, seed + 1)
    cands = [(P, Q)]
    if local:
        centers, radii = T.centers
        for k, (c, rho) in enumerate(zip(centers, radii)):
            if rho <= 0:
                continue
            L = LinearOperator(X, T.cells[k].A)
            D = _directions(X, 64, seed + 2 + k)
            if not all(st.finite for st in sp.strata(X)):
                res = linop._radius_lower_search(L, 128, seed + k, refine=2)
                D = np.vstack([D, res.point[None, :]])
            step = 0.5 * rho / np.linalg.norm(D, axis=1)
            cands.append((c + step[:, None] * D, np.repeat(c[None, :], len(D), 0)))
    Xs = np.vstack([a for a, _ in cands])
    Ys = np.vstack([b for _, b in cands])
    vals = _two_point_values(T, Xs, Ys)
    i = int(np.argmax(vals))
    x, y = Xs[i], Ys[i]
    _, f = sp.duality_set(X, x - y).argmax(eval_pwl(T, x) - eval_pwl(T, y))
    w = Witness(x, y, f)
    return w.value(T), w


def lip_radius(T, tol=1e-6, budget=2000, seed=0):
    """Bracket for the Lipschitz numerical radius.

    upper: the largest per-cell numerical radius upper bound. lower: the best
    of the per-cell lower bounds and the two-point sampled values.
    """
    brackets = [linop.numerical_radius(L, tol=tol, seed=seed) for L in T.linear_pieces()]
    up = max(b.upper for b in brackets)
    lo2, w2 = lip_radius_sampled(T, budget, seed)
    kbest = int(np.argmax([b.lower for b in brackets]))
    lo1 = brackets[kbest].lower
    lo, wit = lo2, w2
    details = {"cells": len(T.cells), "two_point_lower": lo2, "cell_lower": lo1}
    if lo1 > lo2:
        # realize the best cell's witness as a two-point pair inside that cell
        centers, radii = T.centers
        c, rho = centers[kbest], radii[kbest]
        xw = brackets[kbest].lower_witness.x
        if rho > 0 and np.all(np.isreal(xw)):
            xw = np.real(xw)
            x = c + 0.5 * rho * xw / np.linalg.norm(xw)
            _, f = sp.duality_set(T.space, x - c).argmax(eval_pwl(T, x) - eval_pwl(T, c))
            cand = Witness(x, c, f)
            if cand.value(T) >= lo:
                lo, wit = cand.value(T), cand
        lo = max(lo, lo1)
    return RadiusBracket(lo, max(up, lo), wit, CELL_SUP, tol, up - lo <= tol, details)


def lip_radius_limit(T, t_schedule=None, alphas=None, budget=256, seed=0):
    """(||I + t alpha T||_L - 1)/t maximized over alpha, as a nonincreasing sequence.

    I + t alpha T keeps the cells of T, so its Lipschitz norm is the largest
    norm among the pieces I + t alpha A.
    """
    seqs = [linop.radius_upper_limit(L, t_schedule, alphas, budget, seed) for L in T.linear_pieces()]
    raw = np.max(np.array([s.raw for s in seqs]), axis=0)
    k = int(np.argmax([s.final for s in seqs]))
    return linop.LimitSequence(seqs[0].t, np.minimum.accumulate(raw), raw,
                               seqs[k].alpha_count, seqs[k].best_alpha)


# ---------------------------------------------------------------------------
# random generator


def _enumerate_states(A1, b1, c, max_cells):
    """Sign states (-1 below, 0 inside, +1 above the clamp) realized by nonempty open cells."""
    n = A1.shape[1]
    states = [()]
    for k in range(A1.shape[0]):
        nxt = []
        for st in states:
            for s in (-1, 0, 1):
                cand = st + (s,)
                C, d = _state_constraints(A1[:k + 1], b1[:k + 1], c, cand)
                cell = Cell(C, d, np.zeros((n, n)), np.zeros(n))
                _, r = cell.chebyshev(1e6)
                if r > 1e-7:
                    nxt.append(cand)
        states = nxt
        if len(states) > max_cells:
            raise GenerationError(f"cell count exceeds the limit {max_cells}; use fewer pieces")
    return states


def _state_constraints(A1, b1, c, state):
    C, d = [], []
    for a, b, s in zip(A1, b1, state):
        if s == -1:
            C.append(a), d.append(-c - b)
        elif s == 1:
            C.append(-a), d.append(-c + b)
        else:
            C += [a, -a]
            d += [c - b, c + b]
    n = A1.shape[1]
    return (np.array(C) if C else np.zeros((0, n))), np.array(d)


def _deep_point(cell, margin):
    """Point of smallest sup-norm at distance >= margin from the cell boundary."""
    n = cell.dim
    norms = np.linalg.norm(cell.C, axis=1)
    # variables (x, s): minimize s subject to |x_i| <= s and Cx <= d - margin*|C_i|
    A_ub = [np.hstack([cell.C, np.zeros((len(cell.C), 1))])] if len(cell.C) else []
    b_ub = [cell.d - margin * norms] if len(cell.C) else []
    A_ub += [np.hstack([np.eye(n), -np.ones((n, 1))]), np.hstack([-np.eye(n), -np.ones((n, 1))])]
    b_ub += [np.zeros(n), np.zeros(n)]
    c = np.zeros(n + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=np.vstack(A_ub), b_ub=np.concatenate(b_ub),
                  bounds=[(None, None)] * (n + 1), method="highs")
    return res.x[:n] if res.status == 0 else np.zeros(n)


def random_pwl(space, pieces=2, seed=0, c=1.0, max_cells=729):
    """Random CPWL map T = A2 clamp_c(A1 x + b1) + A0 x - T(0), compiled to cells.

    ``pieces`` is the number of clamp units, so there are at most 3**pieces
    cells. All layers have standard Gaussian entries.
    """
    if pieces < 1:
        raise InputError("pieces must be >= 1")
    if space.is_complex:
        raise InputError("random_pwl needs a real space")
    n = space.dim
    rng = np.random.default_rng(seed)
    A1 = rng.standard_normal((pieces, n))
    b1 = rng.standard_normal(pieces)
    A2 = rng.standard_normal((n, pieces))
    A0 = rng.standard_normal((n, n))
    states = _enumerate_states(A1, b1, c, max_cells)
    T0 = A2 @ np.clip(b1, -c, c)
    cells = []
    for st in states:
        st = np.array(st)
        C, d = _state_constraints(A1, b1, c, st)
        mid = st == 0
        A = A2 @ (mid[:, None] * A1) + A0
        b = A2 @ np.where(mid, b1, c * st) - T0
        cells.append(Cell(C, d, A, b))
    # box radius: every cell must contain a ball of reasonable size inside the box
    R = 1.0
    for cell in cells:
        _, r = cell.chebyshev(1e6)
        x = _deep_point(cell, min(0.25, 0.5 * r))
        R = max(R, float(np.max(np.abs(x))) + min(0.25, 0.5 * r))
    return PwlOperator(space, tuple(cells), 1.5 * R)
