"""Global Weyl-type quantities of sampled paths.

Limits over l -> infinity are approximated along a geometric ladder of
window lengths; results carry the per-rung values so the reader can judge
convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .almost_period import inclusion_length, scan_values
from .errors import InputError
from .metric_core import EUCLIDEAN, TRUNCATED_EUCLIDEAN, FiniteSet, MetricKind
from .sampled_path import (
    GridMask,
    SampledPath,
    distance_to_value,
    masked_window_mean,
    round_to_grid,
    stack_distance,
    window_cells,
    window_mean_p,
    window_sup,
)

CONVERGENCE_SPREAD = 0.10
COMPACTNESS_CAP = 64
COMPACTNESS_POOL = 256


@dataclass
class MetricReport:
    """Serializable result of one global metric evaluation."""

    metric: str
    params: dict
    value: float
    per_l: list = field(default_factory=list)
    rounding: dict = field(default_factory=dict)
    edge_loss: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "metric": self.metric,
            "params": self.params,
            "value": self.value,
            "per_l": self.per_l,
            "rounding": self.rounding,
            "edge_loss": self.edge_loss,
        }
        out.update(self.extra)
        return out


def default_ladder(length: float, h: float, rungs: int = 5) -> list[float]:
    """Window lengths L/64, L/32, ..., L/4 snapped to the grid."""
    top = length / 4
    out = []
    for j in range(rungs - 1, -1, -1):
        r = round_to_grid(top / 2 ** j, h)
        if r.cells >= 1 and (not out or r.used > out[-1]):
            out.append(r.used)
    if not out:
        raise InputError("window too short for an l-ladder")
    return out


def _ladder(f_len: float, h: float, n: int, ladder: Sequence[float] | None) -> list:
    if ladder is None:
        ladder = default_ladder(f_len, h)
    rungs = sorted(float(l) for l in ladder)
    if not rungs or rungs[0] <= 0:
        raise InputError("ladder must contain positive lengths")
    cells = [round_to_grid(l, h, minimum=1) for l in rungs]
    if cells[-1].cells * 4 > n:
        raise InputError(
            f"ladder top l={rungs[-1]!r} exceeds a quarter of the window {f_len!r}")
    return cells


def _rounding_json(h: float, rungs) -> dict:
    return {"h": h, "l": [r.to_json() for r in rungs],
            "max_l_error": max(r.error for r in rungs)}


def d_pl(f: SampledPath, g: SampledPath, kind: MetricKind, p: float, l: float) -> float:
    """D(p, l) distance between two paths on the same grid."""
    return window_mean_p(f, g, kind, p, l)


def d_pl_report(f: SampledPath, g: SampledPath, kind: MetricKind, p: float,
                l: float) -> MetricReport:
    value = d_pl(f, g, kind, p, l)
    r = window_cells(f, l)
    return MetricReport(
        "d_pl", {"kind": kind.name, "p": p, "l": l}, value,
        per_l=[{"l": r.used, "value": value}],
        rounding=_rounding_json(f.h, [r]), edge_loss=r.used / f.length)


def d_p_limit(f: SampledPath, g: SampledPath, kind: MetricKind, p: float,
              ladder: Sequence[float] | None = None) -> MetricReport:
    """Approximate D(p) = lim_{l->inf} D(p, l) along a ladder of window lengths.

    The estimate is the value at the largest rung; ``spread`` is max - min over
    the last three rungs and ``converged`` is false when it exceeds 10% of the
    estimate.
    """
    rungs = _ladder(f.length, f.h, f.n, ladder)
    values = [window_mean_p(f, g, kind, p, r.used) for r in rungs]
    tail = values[-3:]
    spread = max(tail) - min(tail)
    estimate = values[-1]
    converged = spread <= CONVERGENCE_SPREAD * estimate or spread == 0.0
    return MetricReport(
        "d_p_limit", {"kind": kind.name, "p": p},
        estimate,
        per_l=[{"l": r.used, "value": v} for r, v in zip(rungs, values)],
        rounding=_rounding_json(f.h, rungs),
        edge_loss=rungs[-1].used / f.length,
        extra={"spread": spread, "converged": converged})


def kappa_w(mask: GridMask, ladder: Sequence[float] | None = None) -> MetricReport:
    """Upper Banach density of the flagged cells, read off at the ladder top."""
    rungs = _ladder(mask.length, mask.h, mask.n, ladder)
    flags = mask.flags.astype(float)
    values = [window_sup(flags, r.cells) for r in rungs]
    return MetricReport(
        "kappa_w", {}, values[-1],
        per_l=[{"l": r.used, "value": v} for r, v in zip(rungs, values)],
        rounding=_rounding_json(mask.h, rungs),
        edge_loss=rungs[-1].used / mask.length)


@dataclass
class MStarResult:
    worst_value: float
    worst_mask: GridMask
    report: MetricReport


def greedy_density_mask(mass: np.ndarray, delta: float, windows: Sequence[int]) -> np.ndarray:
    """Select cells by decreasing ``mass`` while every window of every width in
    ``windows`` keeps at most ``floor(delta * w)`` selected cells.

    Cells of zero mass are never selected.
    """
    n = len(mass)
    order = np.argsort(-mass, kind="stable")
    caps = [int(np.floor(delta * w + 1e-9)) for w in windows]
    counts = [np.zeros(n - w + 1, dtype=np.int64) for w in windows]
    chosen = np.zeros(n, dtype=bool)
    for i in order:
        if mass[i] <= 0:
            break
        spans = []
        for w, cap, cnt in zip(windows, caps, counts):
            lo, hi = max(0, i - w + 1), min(i, n - w) + 1
            if cap == 0 or cnt[lo:hi].max() >= cap:
                break
            spans.append((cnt, lo, hi))
        else:
            for cnt, lo, hi in spans:
                cnt[lo:hi] += 1
            chosen[i] = True
    return chosen


def mstar_diagnostic(f: SampledPath, x0, p: float, delta: float,
                     ladder: Sequence[float] | None = None,
                     kind: MetricKind = EUCLIDEAN) -> MStarResult:
    """Greedy adversarial set of density <= delta for the M*_p condition.

    Cells with the largest ``rho^p(f(t), x0)`` are added while the upper
    density constraint holds at every ladder rung; the masked window mean at
    the ladder top is a lower bound for the sup over all such sets.
    """
    if not (0 < delta < 1):
        raise InputError(f"delta must lie in (0, 1), got {delta!r}")
    if p < 1:
        raise InputError(f"p must be >= 1, got {p!r}")
    rungs = _ladder(f.length, f.h, f.n, ladder)
    mass = distance_to_value(f, x0, kind) ** p
    chosen = greedy_density_mask(mass, delta, [r.cells for r in rungs])
    mask = GridMask.like(f, chosen)
    per_l = [{"l": r.used, "value": masked_window_mean(f, x0, mask, p, r.used, kind)}
             for r in rungs]
    worst = per_l[-1]["value"]
    report = MetricReport(
        "mstar", {"p": p, "delta": delta, "kind": kind.name}, worst, per_l=per_l,
        rounding=_rounding_json(f.h, rungs), edge_loss=rungs[-1].used / f.length,
        extra={"mask_density": kappa_w(mask, [r.used for r in rungs]).value})
    return MStarResult(worst, mask, report)


@dataclass
class CompactnessResult:
    witness: list
    witness_indices: list[int]
    density_of_far_set: float
    satisfied: bool
    report: MetricReport

    def witness_set(self) -> FiniteSet | None:
        if not self.witness or not isinstance(self.witness[0], np.ndarray):
            return None
        return FiniteSet(np.stack(self.witness))


def _sample_distances(f: SampledPath, j: int, kind: MetricKind) -> np.ndarray:
    c = f.constant_like(j)
    return stack_distance(kind, f.role, f.points, c.points, f.weights, c.weights)


def compactness_diagnostic(f: SampledPath, epsilon: float, delta: float,
                           ladder: Sequence[float] | None = None,
                           kind: MetricKind | None = None,
                           cap: int = COMPACTNESS_CAP,
                           pool_size: int = COMPACTNESS_POOL) -> CompactnessResult:
    """Search a small finite witness K with kappa_W{t : rho(f(t), K) >= eps} < delta.

    Candidates are a farthest-first traversal of the sampled values.  Each
    step anchors on the uncovered sample that comes first (lexicographically
    for vectors, in time otherwise) and adds the candidate covering that
    anchor which brings the most uncovered cells within ``epsilon``.  On the
    line this is the classic optimal interval-cover sweep.
    """
    if not epsilon > 0 or not (0 < delta < 1):
        raise InputError("need epsilon > 0 and delta in (0, 1)")
    kind = kind or MetricKind.for_role(f.role)
    rungs = _ladder(f.length, f.h, f.n, ladder)
    ladder_used = [r.used for r in rungs]

    pool, rows = [0], [_sample_distances(f, 0, kind)]
    nearest = rows[0].copy()
    # pool resolution eps/8 so the cover step can place centres well
    while len(pool) < pool_size and nearest.max() >= epsilon / 8:
        j = int(np.argmax(nearest))
        pool.append(j)
        rows.append(_sample_distances(f, j, kind))
        nearest = np.minimum(nearest, rows[-1])
    near = np.stack(rows) < epsilon

    if f.role == "vector":
        cand_pts = f.points[pool]
        tie_rank = np.empty(len(pool), dtype=np.int64)
        tie_rank[np.lexsort(cand_pts.T[::-1])] = np.arange(len(pool))
        anchor_order = np.lexsort(f.points.T[::-1])
    else:
        tie_rank = np.arange(len(pool))
        anchor_order = np.arange(f.n)

    covered = np.zeros(f.n, dtype=bool)
    picked: list[int] = []
    density = kappa_w(GridMask.like(f, ~covered), ladder_used).value
    while density >= delta and len(picked) < cap:
        gain = (near & ~covered).sum(axis=1)
        gain[picked] = -1
        anchor = anchor_order[np.argmax(~covered[anchor_order])]
        eligible = near[:, anchor] & (gain > 0)
        if not eligible.any():
            eligible = gain > 0
            if not eligible.any():
                break
        best = gain[eligible].max()
        ties = np.flatnonzero(eligible & (gain == best))
        c = int(ties[np.argmin(tie_rank[ties])])
        picked.append(c)
        covered |= near[c]
        density = kappa_w(GridMask.like(f, ~covered), ladder_used).value

    indices = [pool[c] for c in picked]
    witness = [f[i] for i in indices]
    report = MetricReport(
        "compactness", {"epsilon": epsilon, "delta": delta, "kind": kind.name,
                        "cap": cap, "pool_size": pool_size},
        density, per_l=[], rounding=_rounding_json(f.h, rungs),
        edge_loss=rungs[-1].used / f.length,
        extra={"witness_size": len(indices), "satisfied": density < delta,
               "witness": [w.tolist() if isinstance(w, np.ndarray) else w.to_json()
                           for w in witness]})
    return CompactnessResult(witness, indices, density, density < delta, report)


@dataclass
class ChainResult:
    w_test: bool
    mstar_decay: bool
    wtilde_1: bool
    wtilde_2: bool
    details: dict

    @property
    def consistent(self) -> bool:
        """A path in W with M*_p decay must also pass both W-tilde_p checks."""
        return not (self.w_test and self.mstar_decay) or (self.wtilde_1 and self.wtilde_2)

    def to_json(self) -> dict:
        return {"w_test": self.w_test, "mstar_decay": self.mstar_decay,
                "wtilde_1": self.wtilde_1, "wtilde_2": self.wtilde_2,
                "consistent": self.consistent, **self.details}


def inclusion_chain_diagnostic(f: SampledPath, epsilons: Sequence[float], p: float, l: float,
                               tau_step: float, t_max: float,
                               deltas: Sequence[float] = (0.05, 0.1, 0.2, 0.4),
                               ladder: Sequence[float] | None = None,
                               long_window: float = 4.0,
                               cap: int = 256, pool_size: int = 1024,
                               jobs: int | None = None) -> ChainResult:
    """Finite-window tests along the chain W ∩ M*_p ⊆ W-tilde ∩ M*_p ⊆ W-tilde_p.

    * W-test: truncated-metric D(1, l) almost periods relatively dense at every eps.
    * M*_p decay: greedy worst value non-decreasing in delta, at most B^p delta,
      and halving at least once across the delta range.
    * W-tilde condition 1: D(p, long_window * l) almost periods under the plain
      metric, a stand-in for the l -> infinity limit, relatively dense at every eps.
    * W-tilde condition 2: a finite witness with far-set density < delta for
      every (eps, delta) pair.  The witness budget is larger than the
      single-call default: covering a planar image at eps = 0.05 takes a
      few hundred points.
    """
    if f.role != "vector":
        raise InputError("the chain diagnostic runs on vector paths")
    x0 = np.zeros(f.dim)
    trunc = scan_values(f, TRUNCATED_EUCLIDEAN, 1, l, tau_step, t_max, jobs)
    w_lengths = [inclusion_length(trunc.periods(e)) for e in epsilons]
    w_test = all(v is not None for v in w_lengths)

    bound = float(np.max(np.linalg.norm(f.points - x0, axis=1)))
    ds = sorted(deltas)
    worst = [mstar_diagnostic(f, x0, p, d, ladder).worst_value for d in ds]
    mono = all(b >= a - 1e-12 for a, b in zip(worst, worst[1:]))
    capped = all(v <= bound ** p * d + 1e-12 for v, d in zip(worst, ds))
    decays = worst[0] <= 0.5 * worst[-1] or worst[-1] == 0.0
    mstar_ok = mono and capped and decays

    plain = scan_values(f, EUCLIDEAN, p, long_window * l, tau_step, t_max, jobs)
    c1_lengths = [inclusion_length(plain.periods(e)) for e in epsilons]
    wt1 = all(v is not None for v in c1_lengths)

    c2 = []
    for e in epsilons:
        for d in ds:
            res = compactness_diagnostic(f, e, d, ladder, cap=cap, pool_size=pool_size)
            c2.append({"eps": e, "delta": d, "witness_size": len(res.witness_indices),
                       "density": res.density_of_far_set, "satisfied": res.satisfied})
    wt2 = all(row["satisfied"] for row in c2)
    details = {
        "params": {"epsilons": list(epsilons), "deltas": ds, "p": p, "l": l,
                   "long_window": long_window * l, "tau_step": tau_step, "t_max": t_max,
                   "witness_cap": cap, "pool_size": pool_size},
        "w_inclusion_lengths": w_lengths,
        "mstar_values": [{"delta": d, "worst": v} for d, v in zip(ds, worst)],
        "mstar_bound": bound ** p,
        "wtilde_1_inclusion_lengths": c1_lengths,
        "wtilde_2": c2,
    }
    return ChainResult(w_test, mstar_ok, wt1, wt2, details)
