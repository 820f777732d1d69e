"""Ambient metric spaces over R^m.

Three kinds of values live here:

* vectors (1-D float arrays) with the Euclidean metric,
* :class:`FiniteSet` with the Hausdorff metric,
* :class:`FiniteMeasure` with the Levy-Prokhorov metric.

Any of the three may be truncated, ``min(1, d)``.  Every metric has a
batched form working on stacked arrays; the scalar entry points are thin
wrappers so paths and single values share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import CapacityError, InputError

TOL = 1e-12
LP_SUPPORT_CAP = 16
LP_ORACLE_CAP = 10
_LP_ITERATIONS = 44
_LP_CHUNK_ELEMENTS = 1 << 22

ROLES = ("vector", "set", "measure")


def as_point(x) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float vector."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"a point must be a non-empty 1-D sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point coordinates must be finite")
    return arr


def _as_point_rows(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputError(f"expected a non-empty (k, m) point array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point coordinates must be finite")
    return arr


def lex_order(points: np.ndarray) -> np.ndarray:
    """Indices sorting rows of ``points`` lexicographically (first coordinate major)."""
    return np.lexsort(points.T[::-1])


@dataclass(frozen=True, eq=False)
class FiniteSet:
    """Non-empty finite subset of R^m, canonically ordered and de-duplicated."""

    points: np.ndarray

    def __post_init__(self):
        pts = _as_point_rows(self.points)
        pts = pts[lex_order(pts)]
        keep = [0]
        for i in range(1, len(pts)):
            if np.all(np.max(np.abs(pts[keep] - pts[i]), axis=1) > TOL):
                keep.append(i)
        pts = np.ascontiguousarray(pts[keep])
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSet)
            and self.points.shape == other.points.shape
            and bool(np.all(self.points == other.points))
        )

    def __hash__(self):
        return hash(self.points.tobytes())

    def to_json(self) -> list:
        return self.points.tolist()


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    """Probability measure with finite support in R^m.

    Coincident support points (within ``TOL``) are merged and the support is
    kept in lexicographic order.  Weights must be positive and sum to one
    within ``TOL``.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        sup = _as_point_rows(self.support)
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.shape != (len(sup),):
            raise InputError("weights must match the support length")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InputError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > TOL:
            raise InputError(f"weights sum to {w.sum()!r}, expected 1")
        order = lex_order(sup)
        sup, w = sup[order], w[order]
        merged_pts, merged_w = [sup[0]], [w[0]]
        for x, wx in zip(sup[1:], w[1:]):
            for j, y in enumerate(merged_pts):
                if np.max(np.abs(x - y)) <= TOL:
                    merged_w[j] += wx
                    break
            else:
                merged_pts.append(x)
                merged_w.append(wx)
        sup = np.ascontiguousarray(merged_pts, dtype=float)
        w = np.asarray(merged_w, dtype=float)
        sup.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, x) -> "FiniteMeasure":
        return cls([as_point(x)], [1.0])

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    def __len__(self):
        return len(self.support)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteMeasure)
            and self.support.shape == other.support.shape
            and bool(np.all(self.support == other.support))
            and bool(np.all(self.weights == other.weights))
        )

    def __hash__(self):
        return hash((self.support.tobytes(), self.weights.tobytes()))

    def to_json(self) -> dict:
        return {"support": self.support.tolist(), "weights": self.weights.tolist()}


MetricValue = Union[np.ndarray, FiniteSet, FiniteMeasure]

_BASE_ROLE = {"euclidean": "vector", "hausdorff": "set", "levy_prokhorov": "measure"}


@dataclass(frozen=True)
class MetricKind:
    """A base metric, optionally truncated to ``min(1, d)``."""

    base: str = "euclidean"
    truncated: bool = False

    def __post_init__(self):
        if self.base not in _BASE_ROLE:
            raise InputError(f"unknown base metric {self.base!r}")

    @property
    def role(self) -> str:
        return _BASE_ROLE[self.base]

    @property
    def name(self) -> str:
        return ("truncated_" if self.truncated else "") + self.base

    def with_truncation(self, truncated: bool = True) -> "MetricKind":
        return MetricKind(self.base, truncated)

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        text = text.strip().lower().replace("-", "_")
        if text.startswith("truncated_"):
            return cls(text[len("truncated_"):], True)
        return cls(text, False)

    @classmethod
    def for_role(cls, role: str, truncated: bool = False) -> "MetricKind":
        for base, r in _BASE_ROLE.items():
            if r == role:
                return cls(base, truncated)
        raise InputError(f"unknown role {role!r}")


EUCLIDEAN = MetricKind("euclidean")
TRUNCATED_EUCLIDEAN = MetricKind("euclidean", True)
HAUSDORFF = MetricKind("hausdorff")
TRUNCATED_HAUSDORFF = MetricKind("hausdorff", True)
LEVY_PROKHOROV = MetricKind("levy_prokhorov")


def role_of(x) -> str:
    if isinstance(x, FiniteSet):
        return "set"
    if isinstance(x, FiniteMeasure):
        return "measure"
    if isinstance(x, np.ndarray) and x.ndim == 1:
        return "vector"
    raise InputError(f"not a metric value: {type(x).__name__}")


def _dim_of(x) -> int:
    return x.shape[0] if isinstance(x, np.ndarray) else x.dim


# ---------------------------------------------------------------------------
# batched metrics on stacked arrays


def euclidean_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean distance of two (N, m) stacks."""
    return np.sqrt(np.sum((a - b) ** 2, axis=-1))


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (N,ka,m), (N,kb,m) -> (N,ka,kb)
    return np.sqrt(np.sum((a[:, :, None, :] - b[:, None, :, :]) ** 2, axis=-1))


def hausdorff_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Hausdorff distance of stacked point sets (N, ka, m) and (N, kb, m).

    Rows may repeat points (padding); repeats do not change the distance.
    """
    d = _pairwise(a, b)
    forward = d.min(axis=2).max(axis=1)
    backward = d.min(axis=1).max(axis=1)
    return np.maximum(forward, backward)


@lru_cache(maxsize=None)
def _subset_masks(k: int) -> np.ndarray:
    idx = np.arange(1, 1 << k, dtype=np.int64)
    masks = ((idx[:, None] >> np.arange(k)) & 1).astype(float)
    masks.setflags(write=False)
    return masks


def pad_measures(support: np.ndarray, weights: np.ndarray, k: int):
    """Pad stacked measures to ``k`` atoms with zero-weight copies of atom 0."""
    n, k0, m = support.shape
    if k0 == k:
        return support, weights
    extra_pts = np.repeat(support[:, :1, :], k - k0, axis=1)
    extra_w = np.zeros((n, k - k0))
    return (np.concatenate([support, extra_pts], axis=1),
            np.concatenate([weights, extra_w], axis=1))


def _canonical_pair(xs, xw, ys, yw):
    # Orders each row pair by content so (mu, nu) and (nu, mu) run identical arithmetic.
    a = np.concatenate([xs.reshape(len(xs), -1), xw], axis=1)
    b = np.concatenate([ys.reshape(len(ys), -1), yw], axis=1)
    diff = a - b
    nz = diff != 0
    first = np.argmax(nz, axis=1)
    swap = nz.any(axis=1) & (diff[np.arange(len(diff)), first] > 0)
    s = swap[:, None]
    return (np.where(s[..., None], ys, xs), np.where(s, yw, xw),
            np.where(s[..., None], xs, ys), np.where(s, xw, yw))


def _lp_feasible(d, masks, mu_a, nu_a, wmu, wnu, eps, strict=True):
    if strict:
        close = (d < eps[:, None, None]).astype(float)
    else:
        close = (d <= TOL).astype(float)
    reach = np.matmul(masks, close) > 0  # (N,S,k): z in A^eps
    nu_reach = reach @ wnu[:, :, None]
    mu_reach = reach @ wmu[:, :, None]
    slack = eps[:, None] + TOL
    ok = (mu_a <= nu_reach[..., 0] + slack) & (nu_a <= mu_reach[..., 0] + slack)
    return ok.all(axis=1)


def _lp_chunk(xs, xw, ys, yw):
    z = np.concatenate([xs, ys], axis=1)
    wmu = np.concatenate([xw, np.zeros_like(yw)], axis=1)
    wnu = np.concatenate([np.zeros_like(xw), yw], axis=1)
    k = z.shape[1]
    masks = _subset_masks(k)
    d = _pairwise(z, z)
    mu_a = wmu @ masks.T
    nu_a = wnu @ masks.T
    n = len(z)
    out = np.zeros(n)
    zero_ok = _lp_feasible(d, masks, mu_a, nu_a, wmu, wnu, np.zeros(n), strict=False)
    todo = ~zero_ok
    if not todo.any():
        return out
    d, mu_a, nu_a, wmu, wnu = d[todo], mu_a[todo], nu_a[todo], wmu[todo], wnu[todo]
    lo = np.zeros(len(d))
    hi = np.ones(len(d))
    for _ in range(_LP_ITERATIONS):
        mid = 0.5 * (lo + hi)
        ok = _lp_feasible(d, masks, mu_a, nu_a, wmu, wnu, mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    out[todo] = hi
    return out


def levy_prokhorov_batch(xs, xw, ys, yw, cap: int = LP_SUPPORT_CAP) -> np.ndarray:
    """Row-wise Levy-Prokhorov distance of stacked finite measures.

    ``xs`` is (N, ka, m) with weights ``xw`` (N, ka); likewise ``ys``/``yw``.
    Zero weights are allowed and act as padding.  The distance is found by
    bisection on eps, checking ``mu(A) <= nu(A^eps) + eps`` and the mirrored
    inequality over every subset ``A`` of the union support.
    """
    xs, xw, ys, yw = (np.asarray(v, dtype=float) for v in (xs, xw, ys, yw))
    k = xs.shape[1] + ys.shape[1]
    if k > cap:
        raise CapacityError(f"union support {k} exceeds cap {cap}")
    if xs.shape[1] > ys.shape[1]:
        xs, xw, ys, yw = ys, yw, xs, xw
    elif xs.shape[1] == ys.shape[1]:
        xs, xw, ys, yw = _canonical_pair(xs, xw, ys, yw)
    n = len(xs)
    per_row = (1 << k) * k
    chunk = max(1, _LP_CHUNK_ELEMENTS // per_row)
    out = np.empty(n)
    for start in range(0, n, chunk):
        sl = slice(start, start + chunk)
        out[sl] = _lp_chunk(xs[sl], xw[sl], ys[sl], yw[sl])
    return out


def r_delta_batch(x: np.ndarray, support: np.ndarray, weights: np.ndarray,
                  delta: float) -> np.ndarray:
    """Row-wise ``inf{r > 0 : mu[U_r(x)] > delta}`` with open balls.

    Zero-weight atoms are ignored.
    """
    _check_delta(delta)
    d = np.sqrt(np.sum((support - x[:, None, :]) ** 2, axis=-1))
    d = np.where(weights > 0, d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")
    d = np.take_along_axis(d, order, axis=1)
    w = np.take_along_axis(weights, order, axis=1)
    # mass of the closed ball of radius d_j = mass of U_r for r slightly above d_j
    within = d[:, None, :] <= d[:, :, None] + TOL
    mass = np.sum(within * w[:, None, :], axis=2)
    first = np.argmax(mass > delta + TOL, axis=1)
    return d[np.arange(len(d)), first]


def _check_delta(delta):
    if not (0.0 < delta < 1.0):
        raise InputError(f"delta must lie in (0, 1), got {delta!r}")


# ---------------------------------------------------------------------------
# scalar entry points


def _check_pair(x, y):
    rx, ry = role_of(x), role_of(y)
    if rx != ry:
        raise InputError(f"role mismatch: {rx} vs {ry}")
    if _dim_of(x) != _dim_of(y):
        raise InputError(f"dimension mismatch: {_dim_of(x)} vs {_dim_of(y)}")
    return rx


def hausdorff(a: FiniteSet, b: FiniteSet) -> float:
    if not isinstance(a, FiniteSet) or not isinstance(b, FiniteSet):
        raise InputError("hausdorff expects two FiniteSet values")
    _check_pair(a, b)
    return float(hausdorff_batch(a.points[None], b.points[None])[0])


def levy_prokhorov(mu: FiniteMeasure, nu: FiniteMeasure, cap: int = LP_SUPPORT_CAP) -> float:
    if not isinstance(mu, FiniteMeasure) or not isinstance(nu, FiniteMeasure):
        raise InputError("levy_prokhorov expects two FiniteMeasure values")
    _check_pair(mu, nu)
    if len(mu) + len(nu) > cap:
        raise CapacityError(f"union support {len(mu) + len(nu)} exceeds cap {cap}")
    out = levy_prokhorov_batch(mu.support[None], mu.weights[None],
                               nu.support[None], nu.weights[None], cap=cap)
    return float(out[0])


def r_delta(x, mu: FiniteMeasure, delta: float) -> float:
    """Smallest radius whose open ball around ``x`` carries more than ``delta`` of ``mu``."""
    _check_delta(delta)
    x = as_point(x)
    if x.shape[0] != mu.dim:
        raise InputError("dimension mismatch between point and measure")
    return float(r_delta_batch(x[None], mu.support[None], mu.weights[None], delta)[0])


def dist(kind: MetricKind, x: MetricValue, y: MetricValue) -> float:
    """Distance between two values under ``kind``."""
    if isinstance(x, (list, tuple)):
        x = as_point(x)
    if isinstance(y, (list, tuple)):
        y = as_point(y)
    role = _check_pair(x, y)
    if role != kind.role:
        raise InputError(f"metric {kind.name} cannot compare {role} values")
    if role == "vector":
        value = float(euclidean_batch(x[None], y[None])[0])
    elif role == "set":
        value = hausdorff(x, y)
    else:
        value = levy_prokhorov(x, y)
    return min(1.0, value) if kind.truncated else value
