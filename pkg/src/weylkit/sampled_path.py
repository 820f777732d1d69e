"""Uniformly sampled paths t -> U on a finite window.

A :class:`SampledPath` stores its values stacked so that pointwise distances
between two paths are a single vectorised call.  Set values are padded to a
common size by repeating their last point and measure values by zero-weight
atoms; neither padding changes any distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .metric_core import (
    TOL,
    FiniteMeasure,
    FiniteSet,
    MetricKind,
    MetricValue,
    as_point,
    euclidean_batch,
    hausdorff_batch,
    levy_prokhorov_batch,
    pad_measures,
)


@dataclass(frozen=True)
class GridRounding:
    """How a requested length was snapped onto the sample grid."""

    requested: float
    cells: int
    used: float

    @property
    def error(self) -> float:
        return abs(self.requested - self.used)

    def to_json(self) -> dict:
        return {"requested": self.requested, "used": self.used,
                "cells": self.cells, "error": self.error}


def round_to_grid(length: float, h: float, minimum: int = 0) -> GridRounding:
    cells = int(np.floor(length / h + 0.5))
    if cells < minimum:
        raise InputError(f"length {length!r} is below {minimum} grid cells of {h!r}")
    return GridRounding(float(length), cells, cells * h)


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Values of a function on the grid ``t0 + i*h``, ``i = 0..n-1``.

    ``points`` is ``(n, m)`` for the vector role and ``(n, k, m)`` for the
    set and measure roles; ``weights`` is ``(n, k)`` for measures only.
    """

    t0: float
    h: float
    role: str
    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise InputError(f"sample step must be positive, got {self.h!r}")
        pts = np.asarray(self.points, dtype=float)
        if self.role == "vector":
            if pts.ndim == 1:
                pts = pts[:, None]
            ok = pts.ndim == 2
        elif self.role in ("set", "measure"):
            ok = pts.ndim == 3
        else:
            raise InputError(f"unknown role {self.role!r}")
        if not ok:
            raise InputError(f"bad value array shape {pts.shape} for role {self.role}")
        if len(pts) < 2:
            raise InputError("a sampled path needs at least 2 samples")
        if not np.all(np.isfinite(pts)):
            raise InputError("path values must be finite")
        w = self.weights
        if self.role == "measure":
            w = np.asarray(w, dtype=float)
            if w.shape != pts.shape[:2]:
                raise InputError("measure weights do not match the support array")
        elif w is not None:
            raise InputError("only measure paths carry weights")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_values(cls, values: Sequence[MetricValue] | np.ndarray, t0: float,
                    h: float) -> "SampledPath":
        """Build a path from per-sample values of a single role."""
        if isinstance(values, np.ndarray) and values.dtype != object:
            return cls(t0, h, "vector", values)
        values = list(values)
        if not values:
            raise InputError("no values")
        first = values[0]
        if isinstance(first, FiniteSet):
            if not all(isinstance(v, FiniteSet) for v in values):
                raise InputError("mixed roles in path values")
            k = max(len(v) for v in values)
            stack = np.stack([
                np.concatenate([v.points, np.repeat(v.points[-1:], k - len(v), axis=0)])
                for v in values])
            return cls(t0, h, "set", stack)
        if isinstance(first, FiniteMeasure):
            if not all(isinstance(v, FiniteMeasure) for v in values):
                raise InputError("mixed roles in path values")
            k = max(len(v) for v in values)
            sup, wts = [], []
            for v in values:
                s, w = pad_measures(v.support[None], v.weights[None], k)
                sup.append(s[0])
                wts.append(w[0])
            return cls(t0, h, "measure", np.stack(sup), np.stack(wts))
        return cls(t0, h, "vector", np.stack([as_point(v) for v in values]))

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self):
        return self.n

    @property
    def dim(self) -> int:
        return self.points.shape[-1]

    @property
    def length(self) -> float:
        """Window length L = n*h."""
        return self.n * self.h

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n)

    def __getitem__(self, i: int) -> MetricValue:
        if self.role == "vector":
            return self.points[i].copy()
        if self.role == "set":
            return FiniteSet(self.points[i])
        keep = self.weights[i] > 0
        return FiniteMeasure(self.points[i][keep], self.weights[i][keep])

    def values(self) -> list:
        return [self[i] for i in range(self.n)]

    def cells(self, start: int, stop: int) -> "SampledPath":
        """Restriction to sample indices ``start..stop-1``."""
        if not (0 <= start < stop <= self.n) or stop - start < 2:
            raise InputError(f"bad cell range [{start}, {stop}) for {self.n} samples")
        w = None if self.weights is None else self.weights[start:stop]
        return SampledPath(self.t0 + start * self.h, self.h, self.role,
                           self.points[start:stop], w)

    def constant_like(self, index: int) -> "SampledPath":
        """Path on the same grid frozen at sample ``index``."""
        pts = np.broadcast_to(self.points[index], self.points.shape)
        w = None if self.weights is None else np.broadcast_to(self.weights[index],
                                                              self.weights.shape)
        return SampledPath(self.t0, self.h, self.role, pts, w)


def same_grid(f: SampledPath, g: SampledPath) -> bool:
    return (f.n == g.n and abs(f.h - g.h) <= TOL * max(1.0, f.h)
            and abs(f.t0 - g.t0) <= 1e-9 * f.h)


def check_same_grid(f: SampledPath, g: SampledPath):
    if not same_grid(f, g):
        raise InputError(
            f"grid mismatch: (t0={f.t0}, h={f.h}, n={f.n}) vs (t0={g.t0}, h={g.h}, n={g.n})")
    if f.role != g.role:
        raise InputError(f"role mismatch: {f.role} vs {g.role}")
    if f.dim != g.dim:
        raise InputError(f"dimension mismatch: {f.dim} vs {g.dim}")


def _check_kind(kind: MetricKind, role: str):
    if kind.role != role:
        raise InputError(f"metric {kind.name} cannot compare {role} paths")


def stack_distance(kind: MetricKind, role: str, a_pts, b_pts, a_w=None, b_w=None) -> np.ndarray:
    """Row-wise distances between stacked values of one role."""
    _check_kind(kind, role)
    if role == "vector":
        d = euclidean_batch(a_pts, b_pts)
    elif role == "set":
        d = hausdorff_batch(a_pts, b_pts)
    else:
        d = levy_prokhorov_batch(a_pts, a_w, b_pts, b_w)
    return np.minimum(d, 1.0) if kind.truncated else d


def pointwise_distance(f: SampledPath, g: SampledPath, kind: MetricKind) -> np.ndarray:
    """rho(f(t_i), g(t_i)) at every grid point."""
    check_same_grid(f, g)
    return stack_distance(kind, f.role, f.points, g.points, f.weights, g.weights)


def distance_to_value(f: SampledPath, value: MetricValue, kind: MetricKind) -> np.ndarray:
    """rho(f(t_i), value) at every grid point."""
    if f.role == "vector":
        v = as_point(value)
        if v.shape[0] != f.dim:
            raise InputError("dimension mismatch")
        return stack_distance(kind, "vector", f.points, np.broadcast_to(v, f.points.shape))
    single = SampledPath.from_values([value, value], f.t0, f.h)
    if single.role != f.role or single.dim != f.dim:
        raise InputError("value does not match the path role/dimension")
    pts = np.broadcast_to(single.points[0], (f.n,) + single.points.shape[1:])
    w = None if single.weights is None else np.broadcast_to(single.weights[0],
                                                            (f.n, single.weights.shape[1]))
    return stack_distance(kind, f.role, f.points, pts, f.weights, w)


@dataclass(frozen=True)
class ShiftResult:
    path: SampledPath
    cells: int
    rounding_error: float


def shift(f: SampledPath, tau: float) -> ShiftResult:
    """Realise t -> f(t + tau) on the grid.

    ``tau`` is rounded to the nearest multiple ``k*h``; the result lives on
    the sub-grid where both ``t`` and ``t + k*h`` are sampled.
    """
    if abs(tau) >= f.length:
        raise InputError(f"|tau| = {abs(tau)!r} must be below the window length {f.length!r}")
    k = int(np.floor(tau / f.h + 0.5))
    n_overlap = f.n - abs(k)
    if n_overlap < 2:
        raise InputError("shift leaves fewer than 2 overlapping samples")
    src = f.cells(max(0, k), max(0, k) + n_overlap)
    out = SampledPath(f.t0 + max(0, -k) * f.h, f.h, f.role, src.points, src.weights)
    return ShiftResult(out, k, abs(tau - k * f.h))


def common_overlap(f: SampledPath, g: SampledPath) -> tuple[SampledPath, SampledPath]:
    """Restrict two paths with the same step and aligned grids to their shared samples."""
    if abs(f.h - g.h) > TOL * max(1.0, f.h):
        raise InputError("paths have different sample steps")
    offset = (g.t0 - f.t0) / f.h
    k = int(np.floor(offset + 0.5))
    if abs(offset - k) > 1e-6:
        raise InputError("paths are not aligned on a common grid")
    start_f, start_g = max(0, k), max(0, -k)
    count = min(f.n - start_f, g.n - start_g)
    if count < 2:
        raise InputError("paths share fewer than 2 samples")
    return f.cells(start_f, start_f + count), g.cells(start_g, start_g + count)


def window_sup(cell_values: np.ndarray, w: int) -> float:
    """Sup over all full length-``w`` windows of the window mean, via prefix sums."""
    x = np.asarray(cell_values, dtype=float)
    if w < 1 or w > len(x):
        raise InputError(f"window of {w} cells does not fit {len(x)} samples")
    c = np.concatenate(([0.0], np.cumsum(x)))
    best = float((c[w:] - c[:-w]).max()) / w
    # prefix-sum cancellation can dip just below zero on non-negative data
    return max(0.0, best) if x.min() >= 0 else best


def window_cells(f: SampledPath, l: float) -> GridRounding:
    """Round a window length onto f's grid and check it fits."""
    if not l > 0:
        raise InputError(f"window length must be positive, got {l!r}")
    r = round_to_grid(l, f.h, minimum=1)
    if r.cells > f.n:
        raise InputError(f"window l={l!r} exceeds the sampled window {f.length!r}")
    return r


def window_mean_p(f: SampledPath, g: SampledPath, kind: MetricKind, p: float,
                  l: float) -> float:
    """(sup_xi 1/l * integral_xi^{xi+l} rho^p(f, g) dt)^(1/p), rectangle rule."""
    if p < 1:
        raise InputError(f"p must be >= 1, got {p!r}")
    d = pointwise_distance(f, g, kind)
    w = window_cells(f, l).cells
    return window_sup(d ** p, w) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class GridMask:
    """Boolean flag per grid cell; the sampled stand-in for a measurable set T."""

    t0: float
    h: float
    flags: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool)
        if flags.ndim != 1 or len(flags) < 2:
            raise InputError("a mask needs a 1-D flag array of length >= 2")
        if not self.h > 0:
            raise InputError("mask step must be positive")
        object.__setattr__(self, "flags", flags)

    @classmethod
    def like(cls, f: SampledPath, flags) -> "GridMask":
        flags = np.asarray(flags, dtype=bool)
        if flags.shape != (f.n,):
            raise InputError(f"mask length {flags.shape} does not match path length {f.n}")
        return cls(f.t0, f.h, flags)

    @classmethod
    def from_times(cls, f: SampledPath, predicate) -> "GridMask":
        return cls.like(f, predicate(f.times))

    @property
    def n(self) -> int:
        return len(self.flags)

    @property
    def length(self) -> float:
        return self.n * self.h

    def __or__(self, other: "GridMask") -> "GridMask":
        return GridMask(self.t0, self.h, self.flags | other.flags)


def masked_window_mean(f: SampledPath, x0, mask: GridMask, p: float, l: float,
                       kind: MetricKind | None = None) -> float:
    """sup_xi 1/l * integral over [xi, xi+l] ∩ T of rho^p(f(t), x0) dt (no p-th root)."""
    if p < 1:
        raise InputError(f"p must be >= 1, got {p!r}")
    if mask.n != f.n or abs(mask.h - f.h) > TOL * max(1.0, f.h):
        raise InputError("mask and path grids differ")
    kind = kind or MetricKind.for_role(f.role)
    d = distance_to_value(f, x0, kind) ** p
    w = window_cells(f, l).cells
    return window_sup(np.where(mask.flags, d, 0.0), w)
