"""Text formats: the space-spec mini-language and JSON encodings.

Space specs::

    space := field? "l" P ":" DIM          e.g. l2:3, l1:2, l3.5:2, cl2:2
           | field? "linf:" DIM            e.g. linf:4, clinf:2
           | "r"                           the real line (same as l2:1)
           | "poly:" PATH                  JSON file {"vertices": [[...]], "facets": [[...]]}
           | "sum:" ("l1" | "linf") "(" space "," space ")"
    field := "c"                           complex scalars (p-norms only)

Floats are written with Python's shortest round-trip representation, so
every double survives a write/read cycle bit for bit.
"""

import json
import math
import os
import re

import numpy as np

from . import spaces as sp
from .errors import InputError, ParseError

_NUM = re.compile(r"[0-9]+(\.[0-9]*)?([eE][+-]?[0-9]+)?")
_INT = re.compile(r"[0-9]+")


class _Parser:
    def __init__(self, text, base_dir=None):
        self.text = text
        self.pos = 0
        self.base_dir = base_dir

    def fail(self, msg, pos=None):
        raise ParseError(msg, self.text, self.pos if pos is None else pos)

    def peek(self, s):
        return self.text.startswith(s, self.pos)

    def expect(self, s):
        if not self.peek(s):
            self.fail(f"expected {s!r}")
        self.pos += len(s)

    def integer(self):
        m = _INT.match(self.text, self.pos)
        if not m:
            self.fail("expected a positive integer dimension")
        self.pos = m.end()
        n = int(m.group())
        if n < 1:
            self.fail("dimension must be >= 1", m.start())
        return n

    def space(self):
        start = self.pos
        if self.peek("sum:"):
            self.pos += 4
            if self.peek("l1("):
                kind = "l1"
                self.pos += 2
            elif self.peek("linf("):
                kind = "linf"
                self.pos += 4
            else:
                self.fail("expected 'l1(' or 'linf(' after 'sum:'")
            self.expect("(")
            left = self.space()
            self.expect(",")
            right = self.space()
            self.expect(")")
            if left.field is not right.field:
                self.fail("summands must share the base field", start)
            return sp.direct_sum(left, right, kind)
        if self.peek("poly:"):
            self.pos += 5
            end = self.pos
            while end < len(self.text) and self.text[end] not in ",)":
                end += 1
            path = self.text[self.pos:end]
            if not path:
                self.fail("expected a file path after 'poly:'")
            self.pos = end
            try:
                return load_polyhedral(path, self.base_dir)
            except (OSError, ValueError) as e:
                self.fail(f"cannot load polyhedral norm: {e}", start + 5)
        field = sp.Field.REAL
        if self.peek("c"):
            field = sp.Field.COMPLEX
            self.pos += 1
        if self.peek("r") and field is sp.Field.REAL:
            self.pos += 1
            return sp.real_line()
        self.expect("l")
        if self.peek("inf"):
            self.pos += 3
            p = math.inf
        else:
            m = _NUM.match(self.text, self.pos)
            if not m:
                self.fail("expected p (a number >= 1) or 'inf'")
            p = float(m.group())
            if p < 1:
                self.fail("p must be >= 1", m.start())
            self.pos = m.end()
        self.expect(":")
        n = self.integer()
        return sp.lp(n, p, field)


def parse_space(text, base_dir=None):
    """Parse a space spec string into a NormedSpace."""
    text = text.strip()
    if not text:
        raise ParseError("empty space spec", text, 0)
    ps = _Parser(text, base_dir)
    space = ps.space()
    if ps.pos != len(text):
        ps.fail("unexpected trailing characters")
    return space


def load_polyhedral(path, base_dir=None):
    full = path if base_dir is None or os.path.isabs(path) else os.path.join(base_dir, path)
    with open(full) as fh:
        data = json.load(fh)
    if "vertices" not in data:
        raise InputError("polyhedral JSON needs a 'vertices' list")
    return sp.polyhedral(data["vertices"], data.get("facets"), source=path)


def polyhedral_to_json(space):
    return {"vertices": space.vertices.tolist(), "facets": space.facets.tolist()}


# ---------------------------------------------------------------------------
# scalars and vectors


def encode_scalar(z):
    if isinstance(z, (complex, np.complexfloating)):
        return [float(np.real(z)), float(np.imag(z))]
    return float(z)


def decode_scalar(v, where="value"):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InputError(f"{where}: complex entries are [re, im] pairs")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"{where}: expected a number, got {v!r}")
    return float(v)


def encode_vector(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return [[float(a.real), float(a.imag)] for a in v.ravel()]
    return [float(a) for a in v.ravel()]


def decode_vector(v, complex_=False):
    vals = [decode_scalar(a) for a in v]
    return np.array(vals, dtype=complex if complex_ or any(isinstance(a, complex) for a in vals) else float)


# ---------------------------------------------------------------------------
# matrices


def matrix_to_json(A):
    A = np.asarray(A)
    cplx = np.iscomplexobj(A)
    return {"rows": int(A.shape[0]), "cols": int(A.shape[1]),
            "data": encode_vector(A.ravel()), "field": "complex" if cplx else "real"}


def matrix_from_json(obj):
    """Matrix from {"rows", "cols", "data"[, "field"]} or a plain list of rows."""
    if isinstance(obj, dict) and "matrix" in obj:
        obj = obj["matrix"]
    if isinstance(obj, list):
        try:
            rows = [[decode_scalar(v, f"[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(obj)]
        except TypeError:
            raise InputError("matrix rows must be lists of numbers") from None
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise InputError("matrix rows must be non-empty and of equal length")
        cplx = any(isinstance(v, complex) for r in rows for v in r)
        return np.array(rows, dtype=complex if cplx else float)
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"matrix JSON needs integer 'rows', 'cols' and a 'data' list ({e})") from None
    field = obj.get("field", "real")
    if field not in ("real", "complex"):
        raise InputError(f"matrix field must be 'real' or 'complex', got {field!r}")
    if len(data) != rows * cols:
        raise InputError(f"matrix data has {len(data)} entries, expected {rows * cols}")
    vals = [decode_scalar(v, f"data[{i}]") for i, v in enumerate(data)]
    if field == "real" and any(isinstance(v, complex) for v in vals):
        raise InputError("complex entries in a matrix declared real")
    return np.array(vals, dtype=complex if field == "complex" else float).reshape(rows, cols)


def load_matrix(path):
    with open(path) as fh:
        return matrix_from_json(_load_json(fh, path))


def _load_json(fh, path):
    text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg}", text.splitlines()[e.lineno - 1] if text else "", e.colno - 1) from None


# ---------------------------------------------------------------------------
# piecewise-linear operators


def pwl_to_json(T):
    from .lipop import PwlOperator  # noqa: F401

    return {"space": T.space.spec,
            "cells": [{"C": c.C.tolist(), "d": c.d.tolist(), "A": c.A.tolist(), "b": c.b.tolist()}
                      for c in T.cells],
            "box_radius": T.box_radius}


def pwl_from_json(obj, space=None, base_dir=None):
    from .lipop import Cell, PwlOperator

    if space is None:
        if "space" not in obj:
            raise InputError("PWL JSON needs a 'space' entry")
        space = parse_space(obj["space"], base_dir)
    cells = []
    n = space.dim
    for k, c in enumerate(obj.get("cells", [])):
        try:
            C = np.array(c.get("C", []), dtype=float).reshape(-1, n)
            cells.append(Cell(C, np.array(c.get("d", []), dtype=float), np.array(c["A"], dtype=float),
                              np.array(c.get("b", [0.0] * n), dtype=float)))
        except (KeyError, ValueError, TypeError) as e:
            raise InputError(f"cell {k}: {e}") from None
    return PwlOperator(space, tuple(cells), float(obj.get("box_radius", 1.0)))


def load_pwl(path, space=None):
    with open(path) as fh:
        return pwl_from_json(_load_json(fh, path), space, os.path.dirname(path) or None)


# ---------------------------------------------------------------------------
# results


def to_jsonable(obj):
    """Recursively convert numpy values and dataclasses into JSON-ready data."""
    import dataclasses

    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode_vector(obj) if obj.ndim <= 1 else [to_jsonable(r) for r in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_scalar(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(obj, sp.NormedSpace):
        return obj.spec
    if hasattr(obj, "matrix") and hasattr(obj, "space"):
        return {"space": obj.space.spec, "matrix": matrix_to_json(obj.matrix)}
    if hasattr(obj, "cells") and hasattr(obj, "box_radius"):
        return pwl_to_json(obj)
    return obj


def bracket_to_json(B):
    w = B.lower_witness
    return {"lower": float(B.lower), "upper": float(B.upper), "upper_method": B.upper_method,
            "tol": float(B.tol), "converged": bool(B.converged),
            "lower_witness": None if w is None else {"x": encode_vector(w.x), "y": encode_vector(w.y),
                                                     "f": encode_vector(w.f)},
            "details": to_jsonable(B.details)}


def bracket_from_json(obj):
    from .linop import RadiusBracket, Witness

    w = obj.get("lower_witness")
    wit = None if w is None else Witness(decode_vector(w["x"]), decode_vector(w["y"]), decode_vector(w["f"]))
    return RadiusBracket(obj["lower"], obj["upper"], wit, obj["upper_method"], obj["tol"],
                         obj.get("converged", True), obj.get("details", {}))


def dumps(obj, indent=2):
    return json.dumps(to_jsonable(obj), indent=indent, sort_keys=False)
