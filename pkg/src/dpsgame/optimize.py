"""Batched scalar minimization on a log-scaled bracket.

Every best response in this package is a one-dimensional problem over a
positive priority.  Problems are solved in batches (one row per class) so a
whole best-response sweep costs a few dozen vectorized objective calls.

The search has two stages.  Golden-section search on ``log b`` locates the
basin; it cannot resolve the minimizer below roughly ``sqrt(eps)`` because
the objective is flat there.  When a derivative is supplied, bisection on its
sign then pins the minimizer to near machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class BatchMinimum:
    x: np.ndarray
    fun: np.ndarray
    pinned: np.ndarray


def golden_log(fun: Callable, lo, hi, tol: float = 1e-7):
    """Vectorized golden-section search in ``log`` space.

    ``fun`` maps an array of shape ``(m, s)`` to values of the same shape.
    ``lo``/``hi`` broadcast to ``(m, s)``.  Ties keep the left (smaller)
    point.  Returns the final log-bracket ``(a, b)``.
    """
    a = np.log(np.asarray(lo, dtype=float))
    b = np.log(np.asarray(hi, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    a, b = a.copy(), b.copy()
    x1 = b - INVPHI * (b - a)
    x2 = a + INVPHI * (b - a)
    f1 = fun(np.exp(x1))
    f2 = fun(np.exp(x2))
    width = float(np.max(b - a))
    n_iter = max(0, int(np.ceil(np.log(tol / width) / np.log(INVPHI)))) if width > tol else 0
    for _ in range(n_iter):
        left = f1 <= f2
        # keep [a, x2] where the left probe wins, else [x1, b]
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        nx1 = np.where(left, b - INVPHI * (b - a), x2)
        nx2 = np.where(left, x1, a + INVPHI * (b - a))
        probe = np.where(left, nx1, nx2)
        fp = fun(np.exp(probe))
        f1, f2 = np.where(left, fp, f2), np.where(left, f1, fp)
        x1, x2 = nx1, nx2
    return a, b


def polish_by_slope(deriv: Callable, a, b, lo, hi, max_expand: int = 30, max_bisect: int = 80):
    """Refine a log-bracket to a sign change of ``deriv`` and bisect it.

    Entries where no sign change can be found keep the bracket midpoint.
    """
    la, lb = np.log(lo) + 0 * a, np.log(hi) + 0 * b
    a, b = a.copy(), b.copy()
    w = np.maximum(b - a, 1e-12)
    da, db = deriv(np.exp(a)), deriv(np.exp(b))
    for _ in range(max_expand):
        bad_a = (da > 0) & (a > la)
        bad_b = (db < 0) & (b < lb)
        if not (bad_a.any() or bad_b.any()):
            break
        a = np.where(bad_a, np.maximum(a - w, la), a)
        b = np.where(bad_b, np.minimum(b + w, lb), b)
        w = w * 2.0
        da = np.where(bad_a, deriv(np.exp(a)), da)
        db = np.where(bad_b, deriv(np.exp(b)), db)
    ok = (da <= 0) & (db >= 0)
    for _ in range(max_bisect):
        m = 0.5 * (a + b)
        if not np.any(ok & (m != a) & (m != b)):
            break
        dm = deriv(np.exp(m))
        go_right = dm < 0
        a = np.where(ok & go_right, m, a)
        b = np.where(ok & ~go_right, m, b)
    return a, b, ok


def minimize_log(fun: Callable, lo: float, hi: float, m: int, *, deriv: Callable | None = None,
                 starts: int = 1, golden_tol: float = 1e-7) -> BatchMinimum:
    """Minimize ``m`` independent scalar problems over ``[lo, hi]``.

    ``fun`` and ``deriv`` take arrays of shape ``(m, s)``; row ``r`` always
    belongs to problem ``r``.  With ``starts > 1`` the log-bracket is split
    into equal pieces, each searched separately, and the best piece wins.
    A result is flagged as pinned when it lies within ``10 * golden_tol``
    (in log) of either bracket end.
    """
    edges = np.linspace(np.log(lo), np.log(hi), starts + 1)
    s_lo = np.broadcast_to(np.exp(edges[:-1]), (m, starts))
    s_hi = np.broadcast_to(np.exp(edges[1:]), (m, starts))
    a, b = golden_log(fun, s_lo, s_hi, tol=golden_tol)
    if deriv is not None:
        a, b, _ = polish_by_slope(deriv, a, b, s_lo, s_hi)
    xs = np.exp(0.5 * (a + b))
    fs = fun(xs)
    best = np.argmin(fs, axis=1)
    rows = np.arange(m)
    x = xs[rows, best]
    lx = np.log(x)
    pinned = (lx - np.log(lo) < 10 * golden_tol) | (np.log(hi) - lx < 10 * golden_tol)
    return BatchMinimum(x=x, fun=fs[rows, best], pinned=pinned)


def grid_minimize(fun: Callable[[float], float], lo: float, hi: float, points: int = 2001,
                  rounds: int = 40) -> float:
    """Zooming log-grid scan; slow but assumption-free.  Used as a cross-check."""
    a, b = np.log(lo), np.log(hi)
    for _ in range(rounds):
        grid = np.linspace(a, b, points)
        vals = np.array([fun(float(np.exp(g))) for g in grid])
        k = int(np.argmin(vals))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, points - 1)]
        if b - a < 1e-15:
            break
    return float(np.exp(0.5 * (a + b)))
