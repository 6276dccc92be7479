"""Small numerical helpers shared by the bound modules."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

ArrayFn = Callable[[np.ndarray], np.ndarray]

# split fractions u = sigma1 / sigma, dense near both ends of (0, 1)
_U_LO = np.logspace(-14, np.log10(0.5), 240)
_U_GRID = np.concatenate([_U_LO, 1.0 - _U_LO[::-1][1:]])


def inf_split(f1: ArrayFn, f2: ArrayFn, total: float) -> tuple[float, float]:
    """Minimize ``f1(s1) + f2(total - s1)`` over ``0 < s1 < total``.

    Returns ``(value, s1)``. A coarse scan on a grid that is logarithmic
    towards both endpoints brackets the minimum; a bounded Brent search
    refines it. If the scan shows more than one local minimum the scan
    minimum is kept unless the refinement improves on it.
    """
    if total <= 0:
        raise ValueError("total must be positive")
    s1 = total * _U_GRID
    s2 = total - s1
    g = np.asarray(f1(s1), dtype=float) + np.asarray(f2(s2), dtype=float)
    i = int(np.argmin(g))
    best, best_u = float(g[i]), float(_U_GRID[i])
    lo = _U_GRID[max(i - 1, 0)]
    hi = _U_GRID[min(i + 1, len(_U_GRID) - 1)]
    if hi > lo:
        def obj(u: float) -> float:
            a = np.array([total * u])
            return float(f1(a)[0] + f2(total - a)[0])

        res = minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(hi, 1e-300)})
        if res.fun < best:
            best, best_u = float(res.fun), float(res.x)
    return best, best_u * total


def count_local_minima(values: np.ndarray) -> int:
    v = np.asarray(values)
    d = np.sign(np.diff(v))
    d = d[d != 0]
    return int(np.sum((d[:-1] < 0) & (d[1:] > 0)))


def bisect_decreasing(fn: Callable[[float], float], target: float,
                      lo: float, hi: float, rtol: float = 1e-6,
                      strict: bool = False) -> float:
    """Smallest x in [lo, hi] with fn(x) <= target for nonincreasing fn.

    Bisection runs on log(x). With ``strict`` the condition is
    ``fn(x) < target``. Raises ValueError when fn(hi) misses the target.
    """
    ok = (lambda v: v < target) if strict else (lambda v: v <= target)
    if ok(fn(lo)):
        return lo
    if not ok(fn(hi)):
        raise ValueError(f"bound never reaches {target} within [{lo}, {hi}]")
    a, b = np.log(lo), np.log(hi)
    while b - a > rtol * 0.5:
        m = 0.5 * (a + b)
        if ok(fn(np.exp(m))):
            b = m
        else:
            a = m
    return float(np.exp(b))
