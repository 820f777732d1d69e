"""Sampled test inputs with known almost-periodic structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .almost_period import inclusion_length, scan_values
from .errors import InputError
from .metric_core import EUCLIDEAN, FiniteSet
from .sampled_path import SampledPath

SQRT2 = math.sqrt(2.0)
WEIGHT_FLOOR = 0.01


@dataclass(frozen=True)
class Grid:
    t0: float = 0.0
    h: float = 0.01
    n: int = 1000

    def __post_init__(self):
        if not self.h > 0 or self.n < 2:
            raise InputError("grid needs h > 0 and n >= 2")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n)

    @property
    def length(self) -> float:
        return self.n * self.h

    @classmethod
    def from_json(cls, d: dict) -> "Grid":
        if "n" in d:
            n = int(d["n"])
        else:
            n = int(round(float(d["length"]) / float(d["h"])))
        return cls(float(d.get("t0", 0.0)), float(d["h"]), n)

    def to_json(self) -> dict:
        return {"t0": self.t0, "h": self.h, "n": self.n}


@dataclass(frozen=True)
class Term:
    freq: float
    amp: tuple
    phase: float | None = None


@dataclass(frozen=True)
class FrequencySpec:
    """``offset + sum_k a_k sin(2 pi lambda_k t + phi_k)``.

    Phases left as ``None`` are drawn uniformly from ``[0, 2 pi)`` with
    ``seed``, so a spec is reproducible either way.
    """

    terms: tuple
    seed: int = 0
    offset: float = 0.0

    def __post_init__(self):
        terms = tuple(t if isinstance(t, Term) else Term(*t) for t in self.terms)
        if not terms:
            raise InputError("a frequency spec needs at least one term")
        terms = tuple(Term(float(t.freq), tuple(np.atleast_1d(np.asarray(t.amp, float)).tolist()),
                           None if t.phase is None else float(t.phase)) for t in terms)
        freqs = [t.freq for t in terms]
        if len(set(freqs)) != len(freqs):
            raise InputError("frequencies must be distinct")
        dims = {len(t.amp) for t in terms}
        if len(dims) != 1:
            raise InputError("all amplitudes must have the same dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return len(self.terms[0].amp)

    @property
    def amplitude_bound(self) -> float:
        """Upper bound on |f(t)|."""
        return float(sum(np.linalg.norm(t.amp) for t in self.terms)) + abs(self.offset)

    def phases(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        drawn = rng.uniform(0.0, 2 * np.pi, size=len(self.terms))
        return np.array([d if t.phase is None else t.phase for t, d in zip(self.terms, drawn)])

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        out = np.full((len(t), self.dim), self.offset)
        for term, phi in zip(self.terms, self.phases()):
            out += np.sin(2 * np.pi * term.freq * t + phi)[:, None] * np.asarray(term.amp)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "FrequencySpec":
        terms = [Term(t["freq"], t.get("amp", 1.0), t.get("phase")) for t in d["terms"]]
        return cls(tuple(terms), int(d.get("seed", 0)), float(d.get("offset", 0.0)))

    @classmethod
    def single(cls, freq: float, amp=1.0, phase: float = 0.0) -> "FrequencySpec":
        return cls((Term(freq, amp, phase),))

    @classmethod
    def of(cls, freqs: Sequence[float], amp=1.0, phase: float = 0.0) -> "FrequencySpec":
        return cls(tuple(Term(f, amp, phase) for f in freqs))

    def to_json(self) -> dict:
        return {"terms": [{"freq": t.freq, "amp": list(t.amp), "phase": t.phase}
                          for t in self.terms], "seed": self.seed, "offset": self.offset}


def quasi_periodic_signal(spec: FrequencySpec, grid: Grid) -> SampledPath:
    return SampledPath(grid.t0, grid.h, "vector", spec.evaluate(grid.times))


def stern_brocot(count: int) -> list[Fraction]:
    """Rationals of (0, 1] in Stern-Brocot breadth-first order: 1, 1/2, 1/3, 2/3, 1/4, ..."""
    out = [Fraction(1)]
    level = [(Fraction(0), Fraction(1))]
    while len(out) < count:
        nxt = []
        for (a, b) in level:
            m = Fraction(a.numerator + b.numerator, a.denominator + b.denominator)
            out.append(m)
            nxt.extend([(a, m), (m, b)])
        level = nxt
    return out[:count]


def dense_frequencies(count: int) -> list[float]:
    """Interleaved ``q, q*(1 + sqrt 2)`` over the Stern-Brocot rationals.

    The generated module is Q + sqrt(2) Q, which is dense in R.
    """
    qs = stern_brocot((count + 1) // 2)
    out = []
    for q in qs:
        out.extend([float(q), float(q) * (1 + SQRT2)])
    return out[:count]


def dense_module_signal(k: int, grid: Grid,
                        frequencies: Sequence[float] | None = None) -> SampledPath:
    """Scalar ``sum_{j=1..k} 2^-j sin(2 pi lambda_j t)``; |h| < 1 by construction."""
    if k < 1:
        raise InputError("need at least one term")
    lams = list(frequencies) if frequencies is not None else dense_frequencies(k)
    if len(lams) < k:
        raise InputError("not enough frequencies")
    spec = FrequencySpec(tuple(Term(lam, 2.0 ** -(j + 1), 0.0) for j, lam in enumerate(lams[:k])))
    return quasi_periodic_signal(spec, grid)


def scale_signal(scale: FrequencySpec | None, t: np.ndarray) -> np.ndarray:
    """Dilation factor c(t) = 1 + 0.5 * s(t) / bound, always within [0.5, 1.5]."""
    if scale is None:
        return np.ones(len(t))
    if scale.dim != 1:
        raise InputError("scale spec must be scalar")
    bound = scale.amplitude_bound
    if bound == 0:
        return np.ones(len(t))
    return 1.0 + 0.5 * scale.evaluate(t)[:, 0] / bound


def set_valued_path(s0: FiniteSet, translate: FrequencySpec, scale: FrequencySpec | None,
                    grid: Grid) -> SampledPath:
    """F(t) = c(t) * S0 + u(t)."""
    if not isinstance(s0, FiniteSet):
        raise InputError("S0 must be a FiniteSet")
    if translate.dim != s0.dim:
        raise InputError(f"translate dimension {translate.dim} != set dimension {s0.dim}")
    t = grid.times
    u = translate.evaluate(t)
    c = scale_signal(scale, t)
    pts = c[:, None, None] * s0.points[None, :, :] + u[:, None, :]
    return SampledPath(grid.t0, grid.h, "set", pts)


@dataclass(frozen=True)
class MeasureComponent:
    weight: FrequencySpec
    location: FrequencySpec


def measure_valued_path(components: Sequence, grid: Grid,
                        floor: float = WEIGHT_FLOOR) -> SampledPath:
    """mu[.; t] = sum_k w_k(t) delta_{x_k(t)}.

    Weights are a softmax of bounded weight signals, lifted to respect a floor
    (each w_k >= floor) while summing to one.
    """
    comps = [c if isinstance(c, MeasureComponent) else MeasureComponent(*c) for c in components]
    if not comps:
        raise InputError("need at least one component")
    if floor * len(comps) >= 1:
        raise InputError("weight floor too large for the number of components")
    dims = {c.location.dim for c in comps}
    if len(dims) != 1:
        raise InputError("all locations need the same dimension")
    t = grid.times
    logits = np.stack([c.weight.evaluate(t)[:, 0] for c in comps], axis=1)
    logits -= logits.max(axis=1, keepdims=True)
    soft = np.exp(logits)
    soft /= soft.sum(axis=1, keepdims=True)
    w = floor + (1.0 - floor * len(comps)) * soft
    w /= w.sum(axis=1, keepdims=True)
    locs = np.stack([c.location.evaluate(t) for c in comps], axis=1)
    return SampledPath(grid.t0, grid.h, "measure", locs, w)


@dataclass
class BumpPanel:
    """Gaussian bumps exp(-|x - c_j|^2 / s_j^2)."""

    centers: np.ndarray
    scales: np.ndarray

    @property
    def lipschitz(self) -> np.ndarray:
        return math.sqrt(2.0) * math.exp(-0.5) / self.scales

    def integrate(self, mu: SampledPath) -> np.ndarray:
        """(n, J) array of t -> integral of F_j d mu[.; t]."""
        diff = mu.points[:, :, None, :] - self.centers[None, None, :, :]
        vals = np.exp(-np.sum(diff ** 2, axis=-1) / self.scales[None, None, :] ** 2)
        return np.einsum("nk,nkj->nj", mu.weights, vals)


def build_panel(mu: SampledPath, size: int) -> BumpPanel:
    """Deterministic grid of bump centres over the bounding box of the sampled supports."""
    if size < 1:
        raise InputError("panel size must be >= 1")
    if mu.role != "measure":
        raise InputError("panel check needs a measure path")
    atoms = mu.points[mu.weights > 0]
    lo, hi = atoms.min(axis=0), atoms.max(axis=0)
    m = mu.dim
    per_axis = max(1, math.ceil(size ** (1.0 / m) - 1e-9))
    axes = [np.linspace(a, b, per_axis) if per_axis > 1 else np.array([(a + b) / 2])
            for a, b in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)[:size]
    spacing = float(np.max((hi - lo) / max(per_axis - 1, 1)))
    scale = spacing if spacing > 0 else 1.0
    return BumpPanel(mesh, np.full(len(mesh), scale))


@dataclass
class PanelResult:
    worst_inclusion_length: float | None
    inclusion_lengths: list
    panel: BumpPanel
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": "cb_panel",
            "params": self.params,
            "worst_inclusion_length": self.worst_inclusion_length,
            "inclusion_lengths": self.inclusion_lengths,
            "centers": self.panel.centers.tolist(),
            "scales": self.panel.scales.tolist(),
            "lipschitz": self.panel.lipschitz.tolist(),
        }


def panel_paths(mu: SampledPath, panel: BumpPanel) -> list[SampledPath]:
    vals = panel.integrate(mu)
    return [SampledPath(mu.t0, mu.h, "vector", vals[:, j]) for j in range(vals.shape[1])]


def cb_panel_check(mu: SampledPath, panel_size: int, epsilon: float, l: float,
                   tau_step: float, t_max: float, jobs: int | None = None) -> PanelResult:
    """Necessary condition for Weyl almost periodicity of a measure path.

    Every scalar path t -> integral F_j d mu must have relatively dense
    almost periods; the worst inclusion length over the panel is reported
    (``None`` if some test function shows no relative density).
    """
    panel = build_panel(mu, panel_size)
    lengths = []
    for path in panel_paths(mu, panel):
        aps = scan_values(path, EUCLIDEAN, 1, l, tau_step, t_max, jobs).periods(epsilon)
        lengths.append(inclusion_length(aps))
    worst = None if any(v is None for v in lengths) else max(lengths)
    params = {"panel_size": panel_size, "epsilon": epsilon, "l": l,
              "tau_step": tau_step, "t_max": t_max, "h": mu.h}
    return PanelResult(worst, lengths, panel, params)


# ---------------------------------------------------------------- suites

SUITE_AMP = 0.15


def theorem_suite(h: float = 0.01, length: float = 256.0, amp: float = SUITE_AMP,
                  k: int = 8) -> dict:
    """Reference inputs for the selection pipelines.

    g has frequencies {1, sqrt 2}; F translates S0 = {-1, 1} by u with
    frequencies {1, sqrt 3}; ``h`` is the K-term dense-module signal.
    Amplitudes are per term, zero phases.
    """
    grid = Grid(0.0, h, int(round(length / h)))
    u = FrequencySpec.of([1.0, math.sqrt(3.0)], amp=amp)
    return {
        "grid": grid,
        "g": quasi_periodic_signal(FrequencySpec.of([1.0, SQRT2], amp=amp), grid),
        "F": set_valued_path(FiniteSet([-1.0, 1.0]), u, None, grid),
        "u": quasi_periodic_signal(u, grid),
        "h": dense_module_signal(k, grid),
    }


def measure_suite(h: float = 0.01, length: float = 64.0, seed: int = 0) -> list[SampledPath]:
    """Three measure paths on the line: 2, 3 and 4 moving atoms, random phases."""
    grid = Grid(0.0, h, int(round(length / h)))
    base = [1.0, SQRT2, math.sqrt(3.0), math.sqrt(5.0)]
    out = []
    for j, atoms in enumerate((2, 3, 4)):
        comps = []
        for a in range(atoms):
            s = seed * 1000 + j * 10 + a
            # offsets keep the atoms apart
            loc = FrequencySpec((Term(base[a % 4], 0.5), Term(base[(a + 1) % 4] / 2, 0.3)),
                                s, offset=a - (atoms - 1) / 2)
            weight = FrequencySpec((Term(base[(a + 2) % 4], 1.0),), s + 500)
            comps.append(MeasureComponent(weight, loc))
        out.append(measure_valued_path(comps, grid))
    return out
