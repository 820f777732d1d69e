"""Detection of epsilon-almost periods on a tau grid.

A :class:`TauScan` holds the D(p, l) distance between ``f`` and its
translate for every grid tau in ``[-T_max, T_max]``.  Thresholding a scan at
some epsilon gives an :class:`AlmostPeriodSet`; the scan itself is reused
across epsilon ladders.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .metric_core import MetricKind
from .sampled_path import SampledPath, stack_distance, window_sup


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("WEYLKIT_JOBS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class AlmostPeriodSet:
    """Grid taus ``k * tau_step`` whose translate stays within ``epsilon``."""

    epsilon: float | tuple
    kind: str
    p: float
    l: float | None
    tau_step: float
    t_max: float
    grid: np.ndarray          # every scanned multiple k
    values: np.ndarray        # per-grid D value (nan where skipped)
    ks: np.ndarray            # detected multiples, sorted
    skipped: tuple = ()

    @property
    def taus(self) -> np.ndarray:
        return self.ks * self.tau_step

    def __len__(self):
        return len(self.ks)

    def __contains__(self, tau: float) -> bool:
        k = int(np.floor(tau / self.tau_step + 0.5))
        return abs(tau - k * self.tau_step) <= 1e-9 * self.tau_step and k in set(self.ks.tolist())

    def value_at(self, k: int) -> float:
        return float(self.values[int(k) - int(self.grid[0])])

    @property
    def inclusion_length(self) -> float | None:
        return inclusion_length(self)

    def to_json(self) -> dict:
        eps = list(self.epsilon) if isinstance(self.epsilon, tuple) else self.epsilon
        return {
            "epsilon": eps,
            "p": self.p,
            "l": self.l,
            "kind": self.kind,
            "tau_step": self.tau_step,
            "t_max": self.t_max,
            "taus": self.taus.tolist(),
            "values": [None if math.isnan(v) else v for v in self.values.tolist()],
            "inclusion_length": self.inclusion_length,
            "skipped": list(self.skipped),
        }


@dataclass
class TauScan:
    """epsilon-independent per-tau D(p, l) values of one path."""

    kind: MetricKind
    p: float
    l: float
    tau_step: float
    t_max: float
    grid: np.ndarray
    values: np.ndarray
    effective_window: np.ndarray
    h: float
    rounding: dict = field(default_factory=dict)

    def periods(self, epsilon: float) -> AlmostPeriodSet:
        if not epsilon > 0:
            raise InputError(f"epsilon must be positive, got {epsilon!r}")
        ok = ~np.isnan(self.values) & (self.values < epsilon)
        skipped = tuple((self.grid[np.isnan(self.values)] * self.tau_step).tolist())
        return AlmostPeriodSet(float(epsilon), self.kind.name, self.p, self.l,
                               self.tau_step, self.t_max, self.grid, self.values,
                               self.grid[ok], skipped)

    def value(self, tau: float) -> float:
        k = int(np.floor(tau / self.tau_step + 0.5))
        return float(self.values[k - int(self.grid[0])])


def _step_cells(tau_step: float, h: float) -> int:
    ratio = tau_step / h
    cells = int(np.floor(ratio + 0.5))
    if cells < 1 or abs(ratio - cells) > 1e-6:
        raise InputError(f"tau_step {tau_step!r} is not a multiple of h={h!r}")
    return cells


def shifted_distance(f: SampledPath, k: int, kind: MetricKind) -> np.ndarray:
    """rho(f(t_i), f(t_i + k*h)) on the overlap of the window with its translate."""
    n = f.n
    a = slice(max(0, -k), n - max(0, k))
    b = slice(max(0, k), n - max(0, -k))
    wa = None if f.weights is None else f.weights[a]
    wb = None if f.weights is None else f.weights[b]
    return stack_distance(kind, f.role, f.points[a], f.points[b], wa, wb)


def scan_values(f: SampledPath, kind: MetricKind, p: float, l: float, tau_step: float,
                t_max: float, jobs: int | None = None) -> TauScan:
    """D(p, l)(f, f(. + tau)) for every grid tau in [-t_max, t_max].

    Taus whose overlap is shorter than ``l`` are skipped (value nan).
    """
    if p < 1:
        raise InputError(f"p must be >= 1, got {p!r}")
    if t_max > f.length / 2 + 1e-9 * f.h:
        raise InputError(f"t_max {t_max!r} exceeds half the window {f.length / 2!r}")
    step = _step_cells(tau_step, f.h)
    w = int(np.floor(l / f.h + 0.5))
    if w < 1 or w > f.n:
        raise InputError(f"window l={l!r} does not fit the path")
    kmax = int(np.floor(t_max / tau_step + 1e-9))
    grid = np.arange(-kmax, kmax + 1, dtype=np.int64)

    def one(j: int) -> tuple[float, float]:
        cells = int(j) * step
        overlap = f.n - abs(cells)
        if overlap < w:
            return math.nan, overlap * f.h
        d = shifted_distance(f, cells, kind)
        return window_sup(d ** p, w) ** (1.0 / p), overlap * f.h

    jobs = jobs or default_jobs()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, grid))
    else:
        results = [one(j) for j in grid]
    values = np.array([r[0] for r in results])
    eff = np.array([r[1] for r in results])
    rounding = {"h": f.h, "tau_step": tau_step, "l_used": w * f.h,
                "l_error": abs(l - w * f.h), "tau_rounding": 0.0}
    return TauScan(kind, p, w * f.h, tau_step, kmax * tau_step, grid, values, eff,
                   f.h, rounding)


def scan_periods(f: SampledPath, kind: MetricKind, p: float, l: float, epsilon: float,
                 tau_step: float, t_max: float, jobs: int | None = None) -> AlmostPeriodSet:
    """Set of grid (epsilon, D(p, l))-almost periods of ``f`` in [-t_max, t_max]."""
    return scan_values(f, kind, p, l, tau_step, t_max, jobs).periods(epsilon)


def inclusion_length(aps: AlmostPeriodSet) -> float | None:
    """Empirical relative-density length of the detected taus.

    Largest gap between consecutive detected taus, counting the stretches
    from each end of the scan range to the nearest detected tau.  ``None``
    when fewer than 3 taus were detected.
    """
    if len(aps.ks) < 3:
        return None
    ks = np.sort(aps.ks)
    kmax = int(aps.grid[-1])
    kmin = int(aps.grid[0])
    gaps = np.diff(ks)
    widest = max(int(gaps.max()), int(ks[0] - kmin), int(kmax - ks[-1]))
    return widest * aps.tau_step


def _check_grids(a: AlmostPeriodSet, b: AlmostPeriodSet):
    if (abs(a.tau_step - b.tau_step) > 1e-12 * a.tau_step
            or len(a.grid) != len(b.grid) or a.grid[0] != b.grid[0]):
        raise InputError("almost-period sets live on different tau grids")


def intersect(sets: list[AlmostPeriodSet]) -> AlmostPeriodSet:
    """Joint almost periods; per-tau values are the largest constituent value."""
    if not sets:
        raise InputError("nothing to intersect")
    first = sets[0]
    ks = first.ks
    values = first.values.copy()
    eps: list = []
    for s in sets:
        _check_grids(first, s)
        ks = np.intersect1d(ks, s.ks)
        values = np.fmax(values, s.values)
        eps.extend(s.epsilon if isinstance(s.epsilon, tuple) else (s.epsilon,))
    kinds = "&".join(dict.fromkeys(s.kind for s in sets))
    skipped = tuple(sorted(set().union(*(s.skipped for s in sets))))
    return AlmostPeriodSet(tuple(eps), kinds, first.p, first.l, first.tau_step,
                           first.t_max, first.grid, values, ks, skipped)


@dataclass
class Containment:
    contained: bool
    violating_taus: list
    margin: float

    def to_json(self) -> dict:
        return {"contained": self.contained, "violating_taus": self.violating_taus,
                "margin": self.margin}


def containment_check(outer: AlmostPeriodSet, inner: AlmostPeriodSet) -> Containment:
    """Is every tau of ``inner`` also a tau of ``outer``?

    ``margin`` is the largest of outer's per-tau values over inner's taus,
    i.e. how close the containment is to failing.
    """
    _check_grids(outer, inner)
    missing = np.setdiff1d(inner.ks, outer.ks)
    idx = inner.ks - outer.grid[0]
    vals = outer.values[idx]
    margin = float(np.nanmax(vals)) if len(vals) and not np.all(np.isnan(vals)) else 0.0
    return Containment(len(missing) == 0, (missing * outer.tau_step).tolist(), margin)


def path_lipschitz(f: SampledPath, kind: MetricKind) -> float:
    """Largest distance between consecutive samples, per unit time."""
    return float(shifted_distance(f, 1, kind).max()) / f.h


def near_group_violations(aps: AlmostPeriodSet, slack: float) -> list[tuple[float, float]]:
    """Pairs (tau1, tau2) of detected taus whose in-range sum fails D < 2*eps + slack."""
    eps = aps.epsilon if not isinstance(aps.epsilon, tuple) else max(aps.epsilon)
    ks = aps.ks
    lo, hi = int(aps.grid[0]), int(aps.grid[-1])
    sums = ks[:, None] + ks[None, :]
    inside = (sums >= lo) & (sums <= hi)
    vals = np.full(sums.shape, -np.inf)
    vals[inside] = aps.values[sums[inside] - lo]
    bad = inside & ~(np.nan_to_num(vals, nan=np.inf) < 2 * eps + slack)
    i, j = np.nonzero(bad)
    return [(float(ks[a] * aps.tau_step), float(ks[b] * aps.tau_step)) for a, b in zip(i, j)]
