"""Selections of set- and measure-valued paths and their verification.

Selections are exact nearest points, computed per grid point.  Whether the
selected path inherits almost periodicity is not assumed: the verify
pipelines measure it by comparing almost-period sets.  That comparison is a
finite-window proxy; frequency modules are never computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .almost_period import (
    TauScan,
    containment_check,
    inclusion_length,
    intersect,
    scan_values,
)
from .errors import InputError
from .metric_core import (
    EUCLIDEAN,
    TOL,
    TRUNCATED_EUCLIDEAN,
    MetricKind,
    lex_order,
    r_delta_batch,
)
from .sampled_path import SampledPath

CALIBRATION_FACTORS = (1, 2, 3, 5, 8)
PROXY_LABEL = ("finite-window almost-period containment; a proxy for the frequency-module "
               "inclusion, which is not computed")


@dataclass(frozen=True)
class SlackFunction:
    """Increasing eta with eta(0) = 0, linear between breakpoints, constant after the last."""

    breakpoints: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 2 or bp.shape[1] != 2 or len(bp) < 2:
            raise InputError("slack function needs at least two (t, eta) breakpoints")
        t, e = bp[:, 0], bp[:, 1]
        if t[0] != 0 or e[0] != 0:
            raise InputError("slack function must start at (0, 0)")
        if np.any(np.diff(t) <= 0):
            raise InputError("breakpoint abscissae must be strictly increasing")
        if np.any(np.diff(e) < 0) or np.any(e[1:] <= 0):
            raise InputError("eta must be increasing and positive for t > 0")
        object.__setattr__(self, "breakpoints", tuple(map(tuple, bp.tolist())))

    def __call__(self, s):
        bp = np.asarray(self.breakpoints)
        return np.interp(s, bp[:, 0], bp[:, 1])

    @classmethod
    def capped(cls, cap: float) -> "SlackFunction":
        """eta(s) = cap/2 * min(s, 1): strictly below ``cap`` everywhere."""
        if not cap > 0:
            raise InputError("cap must be positive")
        return cls(((0.0, 0.0), (1.0, cap / 2)))

    @classmethod
    def parse(cls, text: str) -> "SlackFunction":
        """From ``"0:0,1:0.5,2:0.6"``."""
        pairs = [tuple(float(v) for v in item.split(":")) for item in text.split(",") if item]
        return cls(tuple(pairs))


@dataclass
class SelectionResult:
    f: SampledPath
    membership_ok: bool
    violations: int
    worst_margin: float
    fallbacks: int = 0
    params: dict = field(default_factory=dict)
    lhs: np.ndarray | None = None
    rhs: np.ndarray | None = None

    def to_json(self) -> dict:
        return {
            "membership_ok": self.membership_ok,
            "bound": {"violations": self.violations, "worst_margin": self.worst_margin},
            "fallbacks": self.fallbacks,
            "params": self.params,
            "checked_at": "every grid point",
        }


def _check_selection_grid(g: SampledPath, other: SampledPath, role: str):
    if g.role != "vector":
        raise InputError("the reference path g must be vector-valued")
    if other.role != role:
        raise InputError(f"expected a {role} path, got {other.role}")
    if g.n != other.n or abs(g.h - other.h) > TOL * max(1.0, g.h) or abs(g.t0 - other.t0) > 1e-9 * g.h:
        raise InputError("paths are not on the same grid")
    if g.dim != other.dim:
        raise InputError(f"dimension mismatch: {g.dim} vs {other.dim}")


def _lex_first(points: np.ndarray, rows: np.ndarray, cand: np.ndarray) -> np.ndarray:
    # cand: (n,k) bool; index of the lexicographically smallest candidate point per row
    out = np.argmax(cand, axis=1)
    multi = np.flatnonzero(cand.sum(axis=1) > 1)
    for i in multi:
        idx = np.flatnonzero(cand[i])
        out[i] = idx[lex_order(points[rows[i], idx])[0]]
    return out


def _membership(points: np.ndarray, f: np.ndarray, valid: np.ndarray | None = None) -> bool:
    eq = np.all(points == f[:, None, :], axis=-1)
    if valid is not None:
        eq &= valid
    return bool(np.all(eq.any(axis=1)))


def nearest_point_selection(g: SampledPath, F: SampledPath, eta: SlackFunction) -> SelectionResult:
    """f(t) = the point of F(t) nearest to g(t); ties to the lexicographically smallest.

    The bound rho(f, g) <= rho(g, F) + eta(rho(g, F)) is checked at every grid
    point (with exact nearest points it holds with zero slack).
    """
    _check_selection_grid(g, F, "set")
    rows = np.arange(F.n)
    d = np.sqrt(np.sum((F.points - g.points[:, None, :]) ** 2, axis=-1))
    dmin = d.min(axis=1)
    cand = d <= dmin[:, None] + TOL
    idx = _lex_first(F.points, rows, cand)
    fvals = F.points[rows, idx]
    f = SampledPath(g.t0, g.h, "vector", fvals)
    lhs = np.sqrt(np.sum((fvals - g.points) ** 2, axis=-1))
    rhs = dmin + eta(dmin)
    bad = lhs > rhs + TOL
    return SelectionResult(
        f, _membership(F.points, fvals), int(bad.sum()), float(np.min(rhs - lhs)),
        params={"selection": "nearest_point", "eta": [list(b) for b in eta.breakpoints],
                "tie_break": "lexicographic"},
        lhs=lhs, rhs=rhs)


def measure_selection(g: SampledPath, mu: SampledPath, delta: float) -> SelectionResult:
    """f(t) in supp mu[.; t] with rho(f(t), g(t)) < r_delta(g(t), mu[.; t]) + delta.

    Among support points meeting the bound, the one nearest to g(t) is taken.
    """
    _check_selection_grid(g, mu, "measure")
    if not (0 < delta < 1):
        raise InputError(f"delta must lie in (0, 1), got {delta!r}")
    rows = np.arange(mu.n)
    r = r_delta_batch(g.points, mu.points, mu.weights, delta)
    valid = mu.weights > 0
    d = np.sqrt(np.sum((mu.points - g.points[:, None, :]) ** 2, axis=-1))
    d = np.where(valid, d, np.inf)
    allowed = d < (r + delta)[:, None]
    empty = ~allowed.any(axis=1)
    # floating-point edge only: fall back to every positive-weight atom
    allowed[empty] = valid[empty]
    dd = np.where(allowed, d, np.inf)
    dmin = dd.min(axis=1)
    cand = allowed & (dd <= dmin[:, None] + TOL)
    idx = _lex_first(mu.points, rows, cand)
    fvals = mu.points[rows, idx]
    f = SampledPath(g.t0, g.h, "vector", fvals)
    lhs = np.sqrt(np.sum((fvals - g.points) ** 2, axis=-1))
    rhs = r + delta
    bad = ~(lhs < rhs + TOL)
    return SelectionResult(
        f, _membership(mu.points, fvals, valid), int(bad.sum()), float(np.min(rhs - lhs)),
        fallbacks=int(empty.sum()),
        params={"selection": "support_point", "delta": delta, "tie_break": "lexicographic"},
        lhs=lhs, rhs=rhs)


def calibration_ladder(eps: float, factors: Sequence[float] = CALIBRATION_FACTORS) -> list[float]:
    return sorted({float(c * eps) for c in factors} | {1.0})


@dataclass
class ScanParams:
    l: float
    tau_step: float
    t_max: float
    jobs: int | None = None
    check_doubling: bool = True

    def to_json(self) -> dict:
        return {"l": self.l, "tau_step": self.tau_step, "t_max": self.t_max}


def _containment_curve(target_sets, f_scan: TauScan, f_scan_doubled: TauScan | None,
                       ladder: Sequence[float]):
    curve, lengths = [], []
    for eps, inner in zip(ladder, target_sets):
        row = {"eps": eps, "eps_prime": None, "margin": None, "contained": False,
               "target_size": int(len(inner)), "target_inclusion_length": inclusion_length(inner)}
        for eps_prime in calibration_ladder(eps):
            outer = f_scan.periods(eps_prime)
            check = containment_check(outer, inner)
            if check.contained:
                row.update(eps_prime=eps_prime, margin=check.margin, contained=True)
                entry = {"eps": eps, "eps_prime": eps_prime,
                         "inclusion_length": inclusion_length(outer)}
                if f_scan_doubled is not None:
                    entry["inclusion_length_doubled"] = inclusion_length(
                        f_scan_doubled.periods(eps_prime))
                lengths.append(entry)
                break
        curve.append(row)
    return curve, lengths


def _scan_pair(path, kind, p, params: ScanParams):
    single = scan_values(path, kind, p, params.l, params.tau_step, params.t_max, params.jobs)
    doubled = None
    if params.check_doubling:
        doubled = scan_values(path, kind, p, params.l, params.tau_step, 2 * params.t_max,
                              params.jobs)
    return single, doubled


def _discretization(g: SampledPath, params: ScanParams) -> dict:
    return {"h": g.h, "tau_step": params.tau_step, "l": params.l, "t_max": params.t_max,
            "edge_loss": params.l / g.length,
            "l_rounding": abs(params.l - round(params.l / g.h) * g.h)}


def _selection_report(sel: SelectionResult, curve, lengths, extra: dict) -> dict:
    out = {
        "bound": {"violations": sel.violations, "worst_margin": sel.worst_margin},
        "membership_ok": sel.membership_ok,
        "containment_curve": curve,
        "inclusion_lengths": lengths,
        "containment_label": PROXY_LABEL,
        "checked_at": "every grid point",
    }
    out.update(extra)
    return out


def verify_thm1(g: SampledPath, F: SampledPath, eta: SlackFunction,
                epsilon_ladder: Sequence[float], params: ScanParams) -> dict:
    """Nearest-point selection plus the almost-period containment curve.

    For each eps, T(eps) is the joint almost-period set of g (truncated
    Euclidean) and F (truncated Hausdorff); the smallest eps' in the
    calibration ladder with P(eps'; f) containing T(eps) is recorded.
    """
    sel = nearest_point_selection(g, F, eta)
    scan_g = scan_values(g, TRUNCATED_EUCLIDEAN, 1, params.l, params.tau_step, params.t_max,
                         params.jobs)
    scan_F = scan_values(F, MetricKind("hausdorff", True), 1, params.l, params.tau_step,
                         params.t_max, params.jobs)
    scan_f, scan_f2 = _scan_pair(sel.f, TRUNCATED_EUCLIDEAN, 1, params)
    targets = [intersect([scan_g.periods(e), scan_F.periods(e)]) for e in epsilon_ladder]
    curve, lengths = _containment_curve(targets, scan_f, scan_f2, epsilon_ladder)

    # bounded set values: order-p evidence for f under the untruncated metric
    wp = []
    for p in (1, 2):
        s = scan_values(sel.f, EUCLIDEAN, p, params.l, params.tau_step, params.t_max, params.jobs)
        wp.append({"p": p, "inclusion_lengths": [
            {"eps": e, "inclusion_length": inclusion_length(s.periods(e))}
            for e in epsilon_ladder]})
    return _selection_report(sel, curve, lengths, {
        "theorem": 1,
        "params": {"epsilon_ladder": list(epsilon_ladder), **params.to_json(),
                   "eta": [list(b) for b in eta.breakpoints]},
        "w_p_evidence": wp,
        "discretization": _discretization(g, params),
    })


def verify_thm3(g: SampledPath, F: SampledPath, h_signal: SampledPath, delta: float,
                epsilon_ladder: Sequence[float], params: ScanParams) -> dict:
    """Selection within ``delta`` of the distance to F, checked against T(eps) ∩ P(eps; h).

    ``h_signal`` is scanned under the plain metric of R; the selection uses a
    slack function capped below ``delta`` so rho(f, g) < rho(g, F) + delta.
    """
    if not delta > 0:
        raise InputError("delta must be positive")
    eta = SlackFunction.capped(delta)
    sel = nearest_point_selection(g, F, eta)
    dist_gF = np.min(np.sqrt(np.sum((F.points - g.points[:, None, :]) ** 2, axis=-1)), axis=1)
    strict_bad = ~(sel.lhs < dist_gF + delta + TOL)
    scan_g = scan_values(g, TRUNCATED_EUCLIDEAN, 1, params.l, params.tau_step, params.t_max,
                         params.jobs)
    scan_F = scan_values(F, MetricKind("hausdorff", True), 1, params.l, params.tau_step,
                         params.t_max, params.jobs)
    scan_h = scan_values(h_signal, EUCLIDEAN, 1, params.l, params.tau_step, params.t_max,
                         params.jobs)
    scan_f, scan_f2 = _scan_pair(sel.f, TRUNCATED_EUCLIDEAN, 1, params)
    targets = [intersect([scan_g.periods(e), scan_F.periods(e), scan_h.periods(e)])
               for e in epsilon_ladder]
    curve, lengths = _containment_curve(targets, scan_f, scan_f2, epsilon_ladder)
    return _selection_report(sel, curve, lengths, {
        "theorem": 3,
        "params": {"epsilon_ladder": list(epsilon_ladder), "delta": delta, **params.to_json()},
        "strict_bound": {"violations": int(strict_bad.sum()),
                         "worst_margin": float(np.min(dist_gF + delta - sel.lhs))},
        "discretization": _discretization(g, params),
    })
