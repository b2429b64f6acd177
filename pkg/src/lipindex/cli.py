"""Command-line entry point.

Exit codes: 0 pass, 1 suite failure, 2 input error, 3 unconverged.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import constructions as cn
from . import index as ix
from . import io as lio
from . import lipop
from . import spaces as sp
from .errors import LipIndexError, NotFoundError
from .linop import LinearOperator, numerical_radius, op_norm_bracket

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNCONVERGED = 0, 1, 2, 3
SUITES = ("bk", "rnp", "sums", "known", "ck")
CONSTRUCTIONS = ("mcshane", "segment", "midpoint", "lush", "ck", "align", "compress", "lift")


@dataclass
class RunConfig:
    command: str
    space: str = None
    inputs: list = field(default_factory=list)
    seed: int = 0
    budget: int = None
    tol: float = 1e-6
    format: str = "json"
    emit_witnesses: bool = False
    options: dict = field(default_factory=dict)


class _Usage(Exception):
    pass


def _config(args):
    inputs = [p for p in (getattr(args, "matrix", None), getattr(args, "pwl", None)) if p]
    opts = {k: getattr(args, k) for k in ("mode", "suite", "kind", "x", "y", "x2", "y2", "eps", "n", "samples")
            if getattr(args, k, None) is not None}
    return RunConfig(args.command, getattr(args, "space", None), inputs, args.seed, getattr(args, "budget", None),
                     args.tol, args.format, args.emit_witnesses, opts)


def _space(args, required=True):
    if not getattr(args, "space", None):
        if required:
            raise _Usage("--space is required")
        return None
    return lio.parse_space(args.space, os.getcwd())


def _operator(args, space):
    if getattr(args, "matrix", None):
        A = lio.load_matrix(args.matrix)
        if space is None:
            raise _Usage("--space is required with --matrix")
        if space.is_complex:
            A = A.astype(complex)
        elif np.iscomplexobj(A):
            raise _Usage("complex matrix given for a real space")
        return LinearOperator(space, A)
    if getattr(args, "pwl", None):
        return lio.load_pwl(args.pwl, space)
    raise _Usage("one of --matrix or --pwl is required")


def _vector(text, name):
    # bare "1,0" is accepted as shorthand for "[1,0]"
    src = text if text.lstrip().startswith("[") else f"[{text}]"
    try:
        v = json.loads(src)
    except json.JSONDecodeError as e:
        raise lio.ParseError(f"{name}: {e.msg}", text, e.pos - (src is not text)) from None
    if not isinstance(v, list):
        raise _Usage(f"{name} must be a JSON list")
    return lio.decode_vector(v)


# ---------------------------------------------------------------------------
# commands


def cmd_radius(args):
    X = _space(args, required=not getattr(args, "pwl", None))
    T = _operator(args, X)
    if isinstance(T, lipop.PwlOperator):
        B = lipop.lip_radius(T, tol=args.tol, budget=args.budget or 2000, seed=args.seed)
    else:
        B = numerical_radius(T, tol=args.tol, budget=args.budget or 256, seed=args.seed)
    body = lio.bracket_to_json(B)
    if not args.emit_witnesses:
        body["lower_witness"] = None
    rows = [{"lower": B.lower, "upper": B.upper, "upper_method": B.upper_method, "converged": B.converged}]
    return (EXIT_OK if B.converged else EXIT_UNCONVERGED), {"radius": body}, rows


def cmd_norm(args):
    X = _space(args, required=not getattr(args, "pwl", None))
    T = _operator(args, X)
    if isinstance(T, lipop.PwlOperator):
        lo = lipop.lip_norm(T, seed=args.seed)
        ups = [op_norm_bracket(LinearOperator(T.space, c.A), seed=args.seed)[1] for c in T.cells]
        up = max(lo, max(ups))
        exact = up == lo
    else:
        lo, up, exact = op_norm_bracket(T, seed=args.seed)
    rows = [{"lower": lo, "upper": up, "exact": exact}]
    return EXIT_OK, {"norm": rows[0]}, rows


def cmd_index(args):
    X = _space(args)
    e = ix.estimate_index(X, args.mode, args.budget or 10_000, args.seed)
    body = {"space": e.space, "mode": e.mode, "upper": e.upper, "heuristic_value": e.heuristic_value,
            "witness_name": e.witness_name, "search_stats": e.search_stats}
    if args.emit_witnesses:
        body["witness"] = lio.to_jsonable(e.witness)
    code = EXIT_OK if e.search_stats.get("bracket_converged", True) else EXIT_UNCONVERGED
    return code, {"index": body}, [{k: body[k] for k in ("space", "mode", "upper", "heuristic_value",
                                                           "witness_name")}]


def cmd_verify(args):
    if args.suite not in SUITES:
        raise _Usage(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    budget = args.budget or 2000
    if args.suite == "bk":
        X = _space(args)
        R = ix.bk_suite(X, args.samples or 200, args.seed)
    elif args.suite == "rnp":
        R = ix.rnp_equality_suite(_space(args), budget, args.seed)
    elif args.suite == "sums":
        Z = _space(args)
        if Z.kind != "sum":
            raise _Usage("the sums suite needs --space sum:l1(X,Y) or sum:linf(X,Y)")
        R = ix.sum_stability_suite(Z.left, Z.right, Z.sum_kind, budget, args.seed)
    elif args.suite == "known":
        R = ix.known_values_suite(args.seed)
    else:
        R = ix.ck_suite(args.n or 3, args.samples or 100, args.eps or 1e-2, args.seed)
    body = ix.report_to_json(R)
    if not args.emit_witnesses:
        for c in body["cases"]:
            c["witness"] = None
    code = EXIT_FAIL if R.failures else (EXIT_UNCONVERGED if R.unconverged else EXIT_OK)
    return code, {"report": body}, R


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise _Usage(f"--{n.replace('_', '-')} is required for construct --kind {args.kind}")


def cmd_construct(args):
    kind = args.kind
    eps = args.eps if args.eps is not None else 1e-2
    rec = {"kind": kind}
    if kind == "lift":
        _need(args, "pwl")
        S = lio.load_pwl(args.pwl, _space(args, required=False))
        T = cn.diagonal_lift(S, args.n or 2)
        ls, lt = lipop.lip_norm(S), lipop.lip_norm(T)
        rec.update(cells=len(T.cells), space=T.space.spec, lip_norm_S=ls, lip_norm_T=lt,
                   residuals={"lip_norm": abs(ls - lt)})
        if args.emit_witnesses:
            rec["operator"] = lio.pwl_to_json(T)
        return EXIT_OK, {"construction": rec}, [_flat(rec)]
    X = _space(args)
    if kind in ("mcshane", "segment", "midpoint", "lush", "ck"):
        _need(args, "x", "y")
        x, y = _vector(args.x, "--x"), _vector(args.y, "--y")
        rec.update(x=x, y=y)
    if kind == "mcshane":
        f = cn.mcshane_extend(x, y, X)
        pts = {"x1": 0.0, "x2": float(sp.norm(X, y - x))}
        rec.update(values_at_endpoints=[f(x), f(y)], residuals={k: abs(v - w) for (k, v), w in
                                                                 zip(pts.items(), [f(x), f(y)])})
    elif kind == "segment":
        _need(args, "x2", "y2")
        y1, y2 = _vector(args.x2, "--x2"), _vector(args.y2, "--y2")
        F = cn.segment_extension(x, y, y1, y2, args.m, X)
        rec.update(y1=y1, y2=y2, M=args.m, residuals={"F(x1)": float(np.max(np.abs(F(x) - y1))),
                                                       "F(x2)": float(np.max(np.abs(F(y) - y2))),
                                                       "max_quotient_over_M": F.max_quotient(seed=args.seed)
                                                       / max(args.m, 1e-300) if args.m > 0 else 0.0})
    elif kind == "midpoint":
        z = cn.midpoint_join(x, y, cn.SphereSet(X), eps)
        r = float(sp.norm(X, x - y))
        rec.update(z=z, residuals={"||z-x|| - r/2": float(sp.norm(X, z - x)) - r / 2,
                                   "||z-y|| - r/2": float(sp.norm(X, z - y)) - r / 2})
    elif kind == "lush":
        w = cn.lush_witness(X, x, y, eps, args.budget or 64, args.seed)
        if isinstance(w, cn.NotFound):
            rec.update(found=False, not_found=lio.to_jsonable(w))
            return EXIT_UNCONVERGED, {"construction": rec}, [_flat(rec)]
        rec.update(found=True, witness=lio.to_jsonable(w), residuals=w.verify(X, x, y))
    elif kind == "ck":
        T = _operator(args, X)
        z, s, g, val = cn.ck_witness_boost(X, T, x, y, eps)
        L = cn.lip_constant(T)
        rec.update(z=z, s=s, g=g, value=val, lipschitz=L, residuals={"margin": val - (1 - 2 * eps) * L})
    elif kind in ("align", "compress"):
        T = _operator(args, X)
        if X.kind != "sum":
            raise _Usage(f"construct --kind {kind} needs a sum space")
        if kind == "align":
            u, v = cn.linf_witness_align(T, eps, args.budget or 2000, args.seed)
            q = float(sp.norm(X, T(u) - T(v))) / float(sp.norm(X, u - v))
            rec.update(u=u, v=v, quotient=q, residuals={"gap": float(sp.norm(X, u - v))
                                                        - float(sp.norm(X.left, X.split(u - v)[0]))})
        else:
            S, side, r = ix.compress_witness(X, T, eps, args.seed)
            rec.update(side=side, normalized_radius_S=r,
                       normalized_radius_T=ix.normalized_radius_upper(T, seed=args.seed)[0])
    if not args.emit_witnesses:
        rec = {k: v for k, v in rec.items() if k in ("kind", "found", "value", "residuals", "cells", "side",
                                                     "normalized_radius_S", "normalized_radius_T", "quotient")}
    return EXIT_OK, {"construction": lio.to_jsonable(rec)}, [_flat(lio.to_jsonable(rec))]


def _flat(rec):
    out = {}
    for k, v in rec.items():
        if isinstance(v, dict):
            out.update({f"{k}.{a}": b for a, b in v.items() if not isinstance(b, (list, dict))})
        elif not isinstance(v, list):
            out[k] = v
    return out


def cmd_describe(args):
    X = _space(args)
    info = {"spec": X.spec, "dim": X.dim, "field": X.field.name.lower(), "kind": X.kind,
            "finite_extreme_points": sp.has_finite_extremes(X)}
    if X.kind == "pnorm":
        info["p"] = "inf" if np.isinf(X.p) else X.p
    if X.kind == "sum":
        info.update(sum_kind=X.sum_kind, left=X.left.spec, right=X.right.spec)
    if sp.has_finite_extremes(X):
        info["extreme_points"] = len(sp.ball_extreme_points(X))
    D = sp.dual_ball_extreme_points(X)
    if D is not None:
        info["dual_extreme_points"] = len(D)
    st = sp.strata(X)
    info["strata"] = [{"finite": s.finite, "size": len(s.points) if s.finite else None,
                       "param_dim": None if s.finite else s.param_dim} for s in st]
    if args.emit_witnesses and sp.has_finite_extremes(X):
        info["vertices"] = sp.ball_extreme_points(X)
    return EXIT_OK, {"space": lio.to_jsonable(info)}, [{k: v for k, v in info.items()
                                                         if not isinstance(v, (list, dict, np.ndarray))}]


COMMANDS = {"radius": cmd_radius, "norm": cmd_norm, "index": cmd_index, "verify": cmd_verify,
            "construct": cmd_construct, "describe": cmd_describe}


# ---------------------------------------------------------------------------
# parsing and output


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="space spec, e.g. l2:2, cl2:2, linf:3, sum:l1(l2:2,r), poly:FILE")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--emit-witnesses", action="store_true",
                        help="include witness records (points, functionals, operators) in the output")
    p = argparse.ArgumentParser(prog="lipindex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"lipindex {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("radius", "norm"):
        c = sub.add_parser(name, parents=[common])
        c.add_argument("--matrix")
        c.add_argument("--pwl")
    c = sub.add_parser("index", parents=[common])
    c.add_argument("--mode", choices=(ix.LINEAR, ix.LIPSCHITZ), default=ix.LINEAR)
    c = sub.add_parser("verify", parents=[common])
    c.add_argument("--suite", required=True)
    c.add_argument("--samples", type=int)
    c.add_argument("--n", type=int)
    c.add_argument("--eps", type=float)
    c = sub.add_parser("construct", parents=[common])
    c.add_argument("--kind", required=True, choices=CONSTRUCTIONS)
    c.add_argument("--matrix")
    c.add_argument("--pwl")
    c.add_argument("--x", help="JSON list")
    c.add_argument("--y", help="JSON list")
    c.add_argument("--x2", help="JSON list (segment: value at x)")
    c.add_argument("--y2", help="JSON list (segment: value at y)")
    c.add_argument("--m", type=float, default=1.0)
    c.add_argument("--eps", type=float)
    c.add_argument("--n", type=int)
    sub.add_parser("describe", parents=[common])
    return p


def _color(text, code, stream):
    if os.environ.get("NO_COLOR") is not None or not stream.isatty():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def _emit(cfg, payload, rows, stream):
    if cfg.format == "csv":
        if isinstance(rows, ix.VerificationReport):
            stream.write(ix.report_to_csv(rows))
            return
        import csv

        keys = list(dict.fromkeys(k for r in rows for k in r))
        w = csv.DictWriter(stream, keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return
    doc = {"tool": "lipindex", "version": __version__, "config": asdict(cfg)}
    doc.update(payload)
    stream.write(json.dumps(lio.to_jsonable(doc), indent=2) + "\n")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT
    cfg = _config(args)
    try:
        code, payload, rows = COMMANDS[args.command](args)
    except (_Usage, LipIndexError, OSError) as e:
        if isinstance(e, NotFoundError):
            stderr.write(_color("not found: ", "33", stderr) + str(e) + "\n")
            return EXIT_UNCONVERGED
        stderr.write(_color("error: ", "31", stderr) + str(e) + "\n")
        return EXIT_INPUT
    _emit(cfg, payload, rows, stdout)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
