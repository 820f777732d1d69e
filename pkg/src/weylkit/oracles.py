"""Slow, independent reference computations.

Nothing here shares code with the fast paths it is compared against: the
Levy-Prokhorov oracle solves each subset constraint exactly at its
breakpoints instead of bisecting, window sups are recomputed window by
window, and integrals go through adaptive quadrature.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate

from .errors import CapacityError, InputError
from .metric_core import LP_ORACLE_CAP, FiniteMeasure, FiniteSet


def _euclid(x, y) -> float:
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y)))


def hausdorff_bruteforce(a: FiniteSet, b: FiniteSet) -> float:
    pa, pb = a.points.tolist(), b.points.tolist()
    forward = max(min(_euclid(x, y) for y in pb) for x in pa)
    backward = max(min(_euclid(x, y) for x in pa) for y in pb)
    return max(forward, backward)


def _subset_infimum(mass_a: float, reach: list[float], other: list[float]) -> float:
    """inf{eps > 0 : mass_a <= other(A^eps) + eps} for one subset A.

    ``reach[z]`` is the distance from atom ``z`` to A; atom z lies in the open
    neighbourhood A^eps exactly when reach[z] < eps.
    """
    cuts = sorted(set(reach) | {0.0})
    for j, t in enumerate(cuts):
        upper = cuts[j + 1] if j + 1 < len(cuts) else math.inf
        # for eps in (t, upper] the neighbourhood holds every atom with reach <= t
        covered = sum(w for r, w in zip(reach, other) if r <= t)
        candidate = max(t, mass_a - covered)
        if candidate <= upper:
            return candidate
    return math.inf


def levy_prokhorov_exhaustive(mu: FiniteMeasure, nu: FiniteMeasure,
                              cap: int = LP_ORACLE_CAP) -> float:
    """Exact Levy-Prokhorov distance by enumerating every subset of the union support."""
    if mu.dim != nu.dim:
        raise InputError("dimension mismatch")
    atoms = mu.support.tolist() + nu.support.tolist()
    k = len(atoms)
    if k > cap:
        raise CapacityError(f"union support {k} exceeds oracle cap {cap}")
    w_mu = mu.weights.tolist() + [0.0] * len(nu)
    w_nu = [0.0] * len(mu) + nu.weights.tolist()
    d = [[_euclid(x, y) for y in atoms] for x in atoms]
    best = 0.0
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(k), size):
            reach = [min(d[a][z] for a in subset) for z in range(k)]
            for own, other in ((w_mu, w_nu), (w_nu, w_mu)):
                mass = sum(own[a] for a in subset)
                best = max(best, _subset_infimum(mass, reach, other))
    return best


def r_delta_bruteforce(x, mu: FiniteMeasure, delta: float) -> float:
    """Scan candidate radii (support distances) and test the open-ball mass just above each."""
    radii = sorted({_euclid(x, y) for y in mu.support.tolist()} | {0.0})
    for r in radii:
        probe = r + 1e-9
        mass = sum(w for y, w in zip(mu.support.tolist(), mu.weights.tolist())
                   if _euclid(x, y) < probe)
        if mass > delta:
            return r
    return radii[-1]


def quad_window_mean(f, g, p: float, l: float, starts) -> float:
    """Max over ``starts`` of (1/l * integral of |f - g|^p over [xi, xi+l])^(1/p).

    ``f`` and ``g`` are scalar callables.  Breakpoints are supplied at every
    hundredth of the window so adaptive quadrature sees the kinks of |.|.
    """
    best = 0.0
    for xi in starts:
        pts = np.linspace(xi, xi + l, 101)[1:-1]
        val, _ = integrate.quad(lambda t: abs(f(t) - g(t)) ** p, xi, xi + l,
                                points=pts, limit=500, epsabs=1e-12, epsrel=1e-12)
        best = max(best, (val / l) ** (1.0 / p))
    return best


def direct_window_sup(cell_values: np.ndarray, w: int) -> float:
    """Sup of length-``w`` window means, summing each window from scratch."""
    x = np.asarray(cell_values, dtype=float)
    windows = np.lib.stride_tricks.sliding_window_view(x, w)
    return float(np.max(windows.sum(axis=1) / w))


def direct_period_values(points: np.ndarray, shifts, p: float, w: int,
                         truncated: bool = False) -> list[float]:
    """D(p, l) of a vector path against each cell shift, recomputed from scratch."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    out = []
    for k in shifts:
        k = int(k)
        if n - abs(k) < w:
            out.append(math.nan)
            continue
        if k >= 0:
            a, b = pts[: n - k], pts[k:]
        else:
            a, b = pts[-k:], pts[: n + k]
        d = np.sqrt(((a - b) ** 2).sum(axis=1))
        if truncated:
            d = np.minimum(d, 1.0)
        out.append(direct_window_sup(d ** p, w) ** (1.0 / p))
    return out
