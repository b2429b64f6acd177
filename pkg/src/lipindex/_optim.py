"""Small optimization helpers: golden-section search and multistart refinement."""

import math

import numpy as np
from scipy.optimize import minimize

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(fun, a, b, tol=1e-10, maxiter=200):
    """Minimize a unimodal scalar function on the closed interval [a, b].

    Returns ``(t, f(t))``. The endpoints are evaluated as well, so a minimum
    sitting on the boundary is returned exactly.
    """
    lo, hi = float(a), float(b)
    c = hi - INVPHI * (hi - lo)
    d = lo + INVPHI * (hi - lo)
    fc, fd = fun(c), fun(d)
    for _ in range(maxiter):
        if hi - lo <= tol:
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - INVPHI * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INVPHI * (hi - lo)
            fd = fun(d)
    best_t, best_f = (c, fc) if fc <= fd else (d, fd)
    for t in (float(a), float(b)):
        ft = fun(t)
        if ft <= best_f:
            best_t, best_f = t, ft
    return best_t, best_f


def golden_max_periodic(fun, center, halfwidth, tol=1e-10):
    """Maximize ``fun`` on [center - halfwidth, center + halfwidth]."""
    t, f = golden_section(lambda s: -fun(s), center - halfwidth,
                          center + halfwidth, tol=tol)
    return t, -f


def nelder_mead_max(fun, x0, xatol=1e-11, fatol=1e-14, maxiter=2000):
    """Local maximization of ``fun`` from ``x0`` with Nelder-Mead.

    Returns ``(x, value)``; never worse than the starting point.
    """
    x0 = np.asarray(x0, dtype=float)
    f0 = fun(x0)
    res = minimize(lambda x: -fun(x), x0, method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": fatol,
                            "maxiter": maxiter, "adaptive": x0.size > 2})
    if -res.fun > f0:
        return np.asarray(res.x), float(-res.fun)
    return x0, float(f0)


def top_indices(values, k):
    """Indices of the ``k`` largest entries, largest first (stable on ties)."""
    values = np.asarray(values)
    k = min(k, values.size)
    order = np.argsort(-values, kind="stable")
    return order[:k]
