"""Scalar minimization over the Chernoff interval s in (0, 1)."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class UnitMin(NamedTuple):
    value: float
    s: float
    unimodal: bool


def _is_unimodal(vals: np.ndarray, tol: float = 1e-13) -> bool:
    diffs = np.diff(vals)
    signs = np.sign(np.where(np.abs(diffs) < tol, 0.0, diffs))
    signs = signs[signs != 0]
    # allowed: (-)* then (+)*
    return not np.any((signs[:-1] > 0) & (signs[1:] < 0))


def minimize_unit_interval(
    f: Callable[[float], float],
    lo: float = 1e-6,
    hi: float = 1 - 1e-6,
    grid: int = 50,
    width_tol: float = 1e-10,
    limit0: float | None = None,
    limit1: float | None = None,
) -> UnitMin:
    """Grid scan then golden-section refinement of ``f`` on ``[lo, hi]``.

    ``limit0``/``limit1`` are the one-sided limits of ``f`` at ``s -> 0+`` and
    ``s -> 1-``; when one of them undercuts the interior minimum the infimum
    is attained there and ``s`` is reported as 0 or 1.
    """
    ss = np.linspace(lo, hi, grid)
    vals = np.array([f(s) for s in ss])
    i = int(np.argmin(vals))
    a, b = ss[max(i - 1, 0)], ss[min(i + 1, grid - 1)]
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a < width_tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    best_s, best = (c, fc) if fc < fd else (d, fd)
    if vals[i] < best:
        best_s, best = ss[i], vals[i]
    if limit0 is not None and limit0 < best:
        best_s, best = 0.0, limit0
    if limit1 is not None and limit1 < best:
        best_s, best = 1.0, limit1
    return UnitMin(float(best), float(best_s), _is_unimodal(vals))
