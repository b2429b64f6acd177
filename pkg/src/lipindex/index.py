"""Numerical index estimates and falsification suites.

``estimate_index`` is a seeded search: a cheap batched surrogate of the
normalized radius omega(T)/||T|| screens random and curated operators, a
coordinatewise descent polishes the best few, and the survivors are
certified with full radius brackets. The reported ``upper`` is
omega_upper(T)/||T||_lower for the winning operator, so it is always an upper
bound for the index.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import constructions as cn
from . import lipop
from . import spaces as sp
from .errors import InputError, LipIndexError, NotFoundError
from .linop import LinearOperator, daugavet_gap, numerical_radius, op_norm_bracket
from .lipop import PwlOperator

LINEAR = "linear"
LIPSCHITZ = "lipschitz"
SEARCH_TOL = 5e-3
CLOSED_TOL = 1e-6
INV_E = float(np.exp(-1.0))


# ---------------------------------------------------------------------------
# curated operators


def _pad(M, n, offset=0):
    out = np.zeros((n, n), dtype=M.dtype)
    k = M.shape[0]
    out[offset:offset + k, offset:offset + k] = M
    return out


def battery(space):
    """Named matrices that random search tends to miss: shifts, rotations, rank-one, sign matrices."""
    n = space.dim
    dt = space.field.dtype
    ops = [("identity", np.eye(n, dtype=dt)), ("minus-identity", -np.eye(n, dtype=dt))]
    if space.is_complex:
        ops.append(("i-identity", 1j * np.eye(n)))
    if n >= 2:
        S = np.diag(np.ones(n - 1), 1).astype(dt)
        ops.append(("shift", S))
        ops.append(("rotation", _pad(np.array([[0.0, -1.0], [1.0, 0.0]], dtype=dt), n)))
        R = np.zeros((n, n), dtype=dt)
        R[0, 1] = 1.0
        ops.append(("rank-one", R))
        ops.append(("sign-2", _pad(np.array([[1.0, 1.0], [1.0, -1.0]], dtype=dt), n)))
        ops.append(("sign-2b", _pad(np.array([[1.0, -1.0], [1.0, 1.0]], dtype=dt), n)))
        ops.append(("reflection", np.diag([1.0] + [-1.0] * (n - 1)).astype(dt)))
        ops.append(("ones", np.ones((n, n), dtype=dt)))
        C = np.roll(np.eye(n), 1, axis=0).astype(dt)
        ops.append(("cyclic", C))
        if space.is_complex:
            ops.append(("phase-diag", np.diag(np.exp(2j * np.pi * np.arange(n) / n))))
    if space.kind == "sum":
        a, b = space.left.dim, space.right.dim
        for name, T in battery(space.left):
            ops.append((f"left:{name}", _block(T.matrix, np.zeros((b, b), dtype=dt))))
        for name, T in battery(space.right):
            ops.append((f"right:{name}", _block(np.zeros((a, a), dtype=dt), T.matrix)))
    return [(name, LinearOperator(space, M)) for name, M in ops if np.any(M)]


def _block(A, B):
    out = np.zeros((A.shape[0] + B.shape[0],) * 2, dtype=np.result_type(A, B))
    out[:A.shape[0], :A.shape[0]] = A
    out[A.shape[0]:, A.shape[0]:] = B
    return out


def random_matrix(space, rng):
    n = space.dim
    if space.is_complex:
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return rng.standard_normal((n, n))


# ---------------------------------------------------------------------------
# batched surrogate of omega(T)/||T||


class _Surrogate:
    """Batch evaluator of omega(M)/||M|| (exact on polyhedral and Euclidean spaces)."""

    def __init__(self, space, samples=192, seed=0):
        self.space = space
        X = space
        if X.kind == "pnorm" and X.p == 2.0 and not X.is_complex:
            self.kind = "rl2"
        elif X.kind == "pnorm" and X.p == 2.0:
            self.kind = "cl2"
            th = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
            self.phases = np.exp(1j * th)
        elif X.kind == "pnorm" and np.isinf(X.p):
            self.kind = "linf"
        elif all(s.finite for s in sp.strata(X)):
            self.kind = "points"
            self.P = np.vstack([s.points for s in sp.strata(X)])
        else:
            self.kind = "sampled"
            P = sp.sample_sphere(X, samples, seed)
            extra = [s.points for s in sp.strata(X) if s.finite]
            self.P = np.vstack([P] + extra) if extra else P
        self.exact = self.kind in ("rl2", "linf", "points")
        self.calls = 0

    def __call__(self, Ms):
        Ms = np.asarray(Ms)
        self.calls += len(Ms)
        out = np.empty(len(Ms))
        step = 1024
        for i in range(0, len(Ms), step):
            out[i:i + step] = self._eval(Ms[i:i + step])
        return out

    def _eval(self, Ms):
        if self.kind == "rl2":
            w = np.linalg.eigvalsh((Ms + np.swapaxes(Ms, 1, 2)) / 2)
            om = np.max(np.abs(w), axis=1)
            nm = np.linalg.norm(Ms, ord=2, axis=(1, 2))
        elif self.kind == "cl2":
            H = self.phases[None, :, None, None] * Ms[:, None]
            H = (H + np.conj(np.swapaxes(H, 2, 3))) / 2
            om = np.max(np.linalg.eigvalsh(H)[..., -1], axis=1)
            nm = np.linalg.norm(Ms, ord=2, axis=(1, 2))
        elif self.kind == "linf":
            return np.ones(len(Ms))
        else:
            X, P = self.space, self.P
            N, m = len(Ms), len(P)
            V = np.einsum("kij,pj->kpi", Ms, P).reshape(N * m, -1)
            Z = np.broadcast_to(P, (N, m, P.shape[1])).reshape(N * m, -1)
            om = sp.face_sup_batch(X, Z, V).reshape(N, m).max(axis=1)
            nm = sp.norm(X, V).reshape(N, m).max(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(nm > 0, om / nm, np.inf)
        return r


def _descend(sur, M, iters=40, step=0.25):
    """Coordinatewise descent of the surrogate from M (entries, real and imaginary parts)."""
    n = M.shape[0]
    cplx = np.iscomplexobj(M)
    dirs = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=M.dtype)
            E[i, j] = 1.0
            dirs.append(E)
            if cplx:
                dirs.append(1j * E)
    D = np.array(dirs)
    M = M / max(np.abs(M).max(), 1e-300)
    cur = float(sur(M[None])[0])
    it = 0
    while it < iters and step > 1e-6:
        it += 1
        cand = np.concatenate([M[None] + step * D, M[None] - step * D])
        vals = sur(cand)
        k = int(np.argmin(vals))
        if vals[k] < cur - 1e-15:
            M, cur = cand[k], float(vals[k])
        else:
            step /= 2
    return M, cur, it


# ---------------------------------------------------------------------------
# estimates


@dataclass
class IndexEstimate:
    space: str
    mode: str
    upper: float
    witness: Any
    heuristic_value: float
    search_stats: dict = field(default_factory=dict)
    witness_name: str = ""

    def reevaluate(self, seed=None):
        s = self.search_stats.get("seed", 0) if seed is None else seed
        return normalized_radius_upper(self.witness, seed=s)[0]


def normalized_radius_upper(T, seed=0, tol=1e-7):
    """(omega_upper(T)/||T||_lower, bracket, norm_lower) for a linear or CPWL operator."""
    if isinstance(T, PwlOperator):
        B = lipop.lip_radius(T, tol=tol, seed=seed)
        nl = lipop.lip_norm(T, seed=seed)
    else:
        B = numerical_radius(T, tol=tol, seed=seed)
        nl = op_norm_bracket(T, seed=seed)[0]
    if nl <= 0:
        return float("inf"), B, nl
    return B.upper / nl, B, nl


def normalized_radius_lower(T, seed=0, tol=1e-7):
    """(omega_lower(T)/||T||_upper, bracket) for a linear or CPWL operator."""
    if isinstance(T, PwlOperator):
        B = lipop.lip_radius(T, tol=tol, seed=seed)
        nu = lipop.lip_norm(T, seed=seed)
        if not _pwl_norm_exact(T):
            nu = max(nu, max(op_norm_bracket(LinearOperator(T.space, c.A), seed=seed)[1] for c in T.cells))
    else:
        B = numerical_radius(T, tol=tol, seed=seed)
        nu = op_norm_bracket(T, seed=seed)[1]
    return (B.lower / nu if nu > 0 else 1.0), B


def _pwl_norm_exact(T):
    X = T.space
    return sp.has_finite_extremes(X) or (X.kind == "pnorm" and X.p == 2.0)


def estimate_index(space, mode=LINEAR, budget=10_000, seed=0, top=6, certify=3, pwl_samples=None):
    """Seeded search for operators with small normalized numerical radius.

    ``budget`` is the number of surrogate-screened starting operators. The
    returned ``upper`` bounds n(X) (Linear) or n_L(X) (Lipschitz) from above.
    """
    if budget < 1:
        raise InputError("budget must be >= 1")
    if mode not in (LINEAR, LIPSCHITZ):
        raise InputError(f"mode must be {LINEAR!r} or {LIPSCHITZ!r}")
    rng = np.random.default_rng(seed)
    sur = _Surrogate(space, seed=seed)
    bat = battery(space)
    n_rand = max(budget - len(bat), 0)
    Ms = np.array([T.matrix for _, T in bat] + [random_matrix(space, rng) for _ in range(n_rand)])
    names = [name for name, _ in bat] + [f"random-{k}" for k in range(n_rand)]
    vals = sur(Ms)
    order = np.lexsort((np.arange(len(vals)), vals))
    # polish the best random starts; curated operators are kept as they are
    polished = []
    iters = 0
    for k in [int(i) for i in order if i >= len(bat)][:top]:
        M, v, it = _descend(sur, Ms[k])
        iters += it
        polished.append((v, f"{names[k]}+descent", M))
    pool = [(float(vals[i]), names[i], Ms[i]) for i in order[:certify] if i < len(bat)]
    pool += [(float(vals[i]), names[i], Ms[i]) for i in order if i < len(bat)][:certify]
    pool += sorted(polished, key=lambda t: t[0])[:certify]
    seen, best = set(), None
    for idx, (v, name, M) in enumerate(pool):
        if name in seen:
            continue
        seen.add(name)
        T = LinearOperator(space, M)
        up, B, _ = normalized_radius_upper(T, seed=seed)
        key = (up, idx)
        if best is None or key < best[0]:
            best = (key, T, name, v, B)
    (up, _), T, name, hv, B = best
    stats = {"starts": int(len(Ms)), "iterations": int(iters), "seed": int(seed),
             "surrogate_calls": int(sur.calls), "surrogate_exact": bool(sur.exact),
             "certified": len(seen), "bracket_converged": bool(B.converged),
             "saturation": int(sum(1 for v, _, _ in polished if v <= hv + 1e-3))}
    est = IndexEstimate(space.spec, LINEAR, float(up), T, float(hv), stats, name)
    if mode == LINEAR:
        return est
    return _lipschitz_search(space, est, budget, seed, pwl_samples)


def _lipschitz_search(space, lin, budget, seed, pwl_samples):
    stats = dict(lin.search_stats)
    stats["linear_upper"] = lin.upper
    best = (lin.upper, lin.witness, lin.witness_name, lin.heuristic_value)
    if space.is_complex:
        # CPWL operators are real-only; linear operators are the Lipschitz pool here
        stats["pwl_samples"] = 0
        return IndexEstimate(space.spec, LIPSCHITZ, *best[:1], best[1], best[3], stats, best[2])
    count = min(64, max(4, budget // 400)) if pwl_samples is None else pwl_samples
    cands = []
    if space.dim <= 3:
        cands.append(("clamp", lipop.clamp_map(space)))
    for k in range(count):
        try:
            cands.append((f"random-pwl-{k}", lipop.random_pwl(space, pieces=2, seed=seed * 100_003 + k)))
        except LipIndexError:
            continue
    for name, T in cands:
        up, _, _ = normalized_radius_upper(T, seed=seed)
        if up < best[0]:
            best = (up, T, name, up)
    stats["pwl_samples"] = len(cands)
    return IndexEstimate(space.spec, LIPSCHITZ, float(best[0]), best[1], float(best[3]), stats, best[2])


# ---------------------------------------------------------------------------
# reports


@dataclass
class Case:
    name: str
    status: str
    value: float
    expected: float
    tol: float
    relation: str = "eq"  # eq: |value - expected| <= tol; ge: value >= expected - tol; le: value <= expected + tol
    witness: Any = None


@dataclass
class VerificationReport:
    suite: str
    seed: int
    cases: list
    config: dict = field(default_factory=dict)

    @property
    def failures(self):
        return [c for c in self.cases if c.status == "fail"]

    @property
    def unconverged(self):
        return [c for c in self.cases if c.status == "unconverged"]

    @property
    def ok(self):
        return not self.failures


def check(name, value, expected, tol, relation="eq", converged=True, witness=None):
    value, expected = float(value), float(expected)
    if relation == "eq":
        good = abs(value - expected) <= tol
    elif relation == "ge":
        good = value >= expected - tol
    elif relation == "le":
        good = value <= expected + tol
    else:
        raise InputError(f"unknown relation {relation!r}")
    status = "pass" if good else ("fail" if converged else "unconverged")
    return Case(name, status, value, expected, float(tol), relation, witness)


def report_to_json(R):
    from .io import to_jsonable

    return {"suite": R.suite, "seed": int(R.seed), "config": to_jsonable(R.config),
            "cases": [{"name": c.name, "status": c.status, "value": c.value, "expected": c.expected,
                       "tol": c.tol, "relation": c.relation, "witness": to_jsonable(c.witness)}
                      for c in R.cases]}


def report_to_csv(R):
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "seed", "name", "status", "value", "expected", "tol", "relation"])
    for c in R.cases:
        w.writerow([R.suite, R.seed, c.name, c.status, repr(c.value), repr(c.expected), repr(c.tol),
                    c.relation])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# suites


def bk_suite(space, samples=200, seed=0, tol=1e-6):
    """omega_lower(T) >= ||T||/e - tol on sampled operators of a complex space."""
    if not space.is_complex:
        raise InputError("bk_suite needs a complex space")
    rng = np.random.default_rng(seed)
    ops = [(name, T) for name, T in battery(space)]
    while len(ops) < samples:
        ops.append((f"random-{len(ops)}", LinearOperator(space, random_matrix(space, rng))))
    cases = []
    for name, T in ops[:samples]:
        B = numerical_radius(T, tol=1e-7, seed=seed)
        nu = op_norm_bracket(T, seed=seed)[1]
        cases.append(check(name, B.lower, nu * INV_E, tol, "ge", B.converged,
                           {"matrix": T.matrix, "x": B.lower_witness.x, "y": B.lower_witness.y}))
    return VerificationReport("bk", seed, cases, {"space": space.spec, "samples": samples, "tol": tol})


def rnp_equality_suite(space, budget=2000, seed=0, tol=1e-2, cpwl_checks=8):
    """Compare Linear and Lipschitz index estimates; flag Lipschitz < Linear - tol."""
    lin = estimate_index(space, LINEAR, budget, seed)
    lip = estimate_index(space, LIPSCHITZ, budget, seed)
    cases = [
        check("lipschitz-le-linear", lip.upper, lin.upper, 1e-9, "le"),
        check("no-violation-candidate", lip.upper, lin.upper, tol, "ge",
              witness={"name": lip.witness_name}),
    ]
    if not space.is_complex:
        for k in range(cpwl_checks):
            try:
                T = lipop.random_pwl(space, pieces=2, seed=seed * 7919 + k)
            except LipIndexError:
                continue
            r, B = normalized_radius_lower(T, seed=seed)
            cases.append(check(f"cpwl-{k}-radius-vs-linear-index", r, lin.upper, tol, "ge", B.converged))
    return VerificationReport("rnp", seed, cases, {"space": space.spec, "budget": budget, "tol": tol,
                                                  "linear_upper": lin.upper, "lipschitz_upper": lip.upper})


def compress_witness(Z, T, eps=1e-3, seed=0):
    """Compress a linear operator on a sum to a summand; returns (S, side, normalized radius of S)."""
    A = T.matrix
    rl = slice(0, Z.left.dim)
    rr = slice(Z.left.dim, Z.dim)
    if Z.sum_kind == "linf":
        nl = _row_block_norm(Z, A[rl], Z.left)
        nr = _row_block_norm(Z, A[rr], Z.right)
        left = nl >= nr
        u, v = cn.linf_witness_align(T, eps, seed=seed, left=left)
        S = cn.linf_sum_compress(T, u, v, left=left)
        side = "left" if left else "right"
    else:
        pairs = cn._norming_pairs(T, Z, slice(0, Z.dim), Z, 256, seed)
        best = max(pairs, key=lambda p: float(sp.norm(Z, T(p[0]) - T(p[1]))) / float(sp.norm(Z, p[0] - p[1])))
        S, side = cn.l1_sum_compress(T, best[0], best[1], eps)
    om = cn.callable_radius_sampled(S, seed=seed)
    nm = cn.callable_lip_sampled(S, seed=seed)
    return S, side, (om / nm if nm > 0 else 0.0)


def _row_block_norm(Z, M, comp):
    res = sp.maximize_over_strata(Z, lambda U: sp.norm(comp, U @ M.T), samples=256)
    return float(res.value)


def sum_stability_suite(X, Y, kind="linf", budget=10_000, seed=0, tol=2e-2, mode=LINEAR):
    """index(X (+) Y) against min(index X, index Y), plus compression of the sum witness."""
    if X.dim + Y.dim > 5:
        raise InputError("dim X + dim Y must be <= 5")
    Z = sp.direct_sum(X, Y, kind)
    ex = estimate_index(X, mode, budget, seed)
    ey = estimate_index(Y, mode, budget, seed)
    ez = estimate_index(Z, mode, budget, seed)
    target = min(ex.upper, ey.upper)
    cases = [check(f"index({Z.spec})", ez.upper, target, tol, "eq", ez.search_stats["bracket_converged"],
                   {"name": ez.witness_name})]
    if isinstance(ez.witness, LinearOperator):
        try:
            S, side, r = compress_witness(Z, ez.witness, seed=seed)
            cases.append(check(f"compression-{side}", r, ez.upper, tol, "eq",
                               witness={"side": side, "sum_witness": ez.witness_name}))
        except (NotFoundError, InputError) as e:
            cases.append(Case("compression", "unconverged", float("nan"), ez.upper, tol, "eq", str(e)))
    return VerificationReport("sums", seed, cases, {"X": X.spec, "Y": Y.spec, "kind": kind, "budget": budget,
                                                   "index_X": ex.upper, "index_Y": ey.upper,
                                                   "index_Z": ez.upper})


def known_values_suite(seed=0, dims=(2, 3, 4), random_ops=20):
    """Documented index values on a fixed battery: l1^n, linf^n, real and complex l2^2."""
    rng = np.random.default_rng(seed)
    cases = []
    for n in dims:
        for p in (1.0, np.inf):
            X = sp.lp(n, p)
            ops = battery(X) + [(f"random-{k}", LinearOperator(X, rng.standard_normal((n, n))))
                                for k in range(random_ops)]
            worst = min((normalized_radius_lower(T, seed=seed)[0], name) for name, T in ops)
            cases.append(check(f"{X.spec}:battery-min", worst[0], 1.0, SEARCH_TOL, "ge",
                               witness={"operator": worst[1]}))
            if n <= 3:
                T = lipop.random_pwl(X, pieces=2, seed=seed + n)
                r, B = normalized_radius_lower(T, seed=seed)
                cases.append(check(f"{X.spec}:cpwl", r, 1.0, SEARCH_TOL, "ge", B.converged))
    X = sp.lp(2, 2.0)
    up = min((normalized_radius_upper(T, seed=seed)[0], name) for name, T in battery(X))
    cases.append(check("l2:2:battery-min", up[0], 0.0, CLOSED_TOL, "eq", witness={"operator": up[1]}))
    X = sp.lp(2, 2.0, sp.Field.COMPLEX)
    up = min((normalized_radius_upper(T, seed=seed)[0], name) for name, T in battery(X))
    cases.append(check("cl2:2:battery-min", up[0], 0.5, 1e-3, "eq", witness={"operator": up[1]}))
    return VerificationReport("known", seed, cases, {"dims": list(dims), "random_ops": random_ops})


def ck_suite(n=3, samples=100, eps=1e-2, seed=0):
    """Two-point radius witnesses of value > (1 - 2 eps)||T||_L on l_inf^n from norming pairs."""
    X = sp.lp(n, np.inf)
    rng = np.random.default_rng(seed)
    cases = []
    for k in range(samples):
        T = LinearOperator(X, rng.standard_normal((n, n)))
        L = op_norm_bracket(T)[0]
        # a norming pair: x attains ||T|| at a vertex of the cube, y = -x
        V = sp.ball_extreme_points(X)
        x = V[int(np.argmax(sp.norm(X, V @ T.matrix.T)))]
        z, s, g, val = cn.ck_witness_boost(X, T, x, -x, eps)
        cases.append(check(f"ck-{k}", val, (1 - 2 * eps) * L, 0.0, "ge",
                           witness={"z": z, "s": s, "g": g}))
    return VerificationReport("ck", seed, cases, {"n": n, "samples": samples, "eps": eps})


def daugavet_check(T, seed=0):
    """(gap, pinned) with gap = 1 + ||T|| - max ||I + aT|| and pinned = bracket forces omega = ||T||."""
    B = numerical_radius(T, tol=1e-9, seed=seed)
    lo, up, exact = op_norm_bracket(T, seed=seed)
    pinned = exact and B.lower >= up - 1e-9
    return daugavet_gap(T, seed=seed), bool(pinned), B
