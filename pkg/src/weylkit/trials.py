"""Randomized oracle comparisons shared by the CLI and the test suite."""

from __future__ import annotations

import math

import numpy as np

from .almost_period import scan_values
from .metric_core import (
    EUCLIDEAN,
    TRUNCATED_EUCLIDEAN,
    FiniteMeasure,
    FiniteSet,
    hausdorff,
    levy_prokhorov,
    r_delta,
)
from .oracles import (
    direct_period_values,
    hausdorff_bruteforce,
    levy_prokhorov_exhaustive,
    quad_window_mean,
    r_delta_bruteforce,
)
from .sampled_path import SampledPath, window_mean_p

ORACLE_TOL = 1e-9


def random_set(rng: np.random.Generator, size: int, dim: int = 2) -> FiniteSet:
    return FiniteSet(rng.uniform(-2, 2, size=(size, dim)))


def random_measure(rng: np.random.Generator, size: int, dim: int = 2) -> FiniteMeasure:
    # a coarse lattice makes coincident atoms and tied distances common
    support = rng.integers(-3, 4, size=(size, dim)) * 0.5 + rng.uniform(-0.05, 0.05, (size, dim)) * (
        rng.random() < 0.5)
    w = rng.dirichlet(np.ones(size))
    return FiniteMeasure(support, w)


def _summary(check: str, diffs: list, tol: float, extra: dict | None = None) -> dict:
    diffs = [float(d) for d in diffs]
    out = {"check": check, "trials": len(diffs), "tolerance": tol,
           "max_abs_diff": max(diffs) if diffs else 0.0,
           "mismatches": sum(d > tol for d in diffs)}
    out.update(extra or {})
    return out


def check_lp(trials: int, max_support: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    diffs = []
    for _ in range(trials):
        total = int(rng.integers(2, max_support + 1))
        ka = int(rng.integers(1, total))
        mu = random_measure(rng, ka)
        nu = random_measure(rng, total - ka)
        diffs.append(abs(levy_prokhorov(mu, nu) - levy_prokhorov_exhaustive(mu, nu)))
    return _summary("lp", diffs, ORACLE_TOL, {"max_support": max_support, "seed": seed})


def check_hausdorff(trials: int, max_support: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    diffs = []
    for _ in range(trials):
        a = random_set(rng, int(rng.integers(1, max_support + 1)))
        b = random_set(rng, int(rng.integers(1, max_support + 1)))
        diffs.append(abs(hausdorff(a, b) - hausdorff_bruteforce(a, b)))
    return _summary("hausdorff", diffs, ORACLE_TOL, {"max_support": max_support, "seed": seed})


def check_r_delta(trials: int, max_support: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    diffs = []
    for _ in range(trials):
        mu = random_measure(rng, int(rng.integers(1, max_support + 1)))
        x = rng.uniform(-2, 2, size=2)
        delta = float(rng.uniform(0.05, 0.95))
        diffs.append(abs(r_delta(x, mu, delta) - r_delta_bruteforce(x, mu, delta)))
    return _summary("r_delta", diffs, ORACLE_TOL, {"max_support": max_support, "seed": seed})


QUADRATURE_CASES = (
    # (name, h, tolerance): sin(2 pi t) vs 0, and sin vs its half-period shift
    ("sin_vs_zero", 1e-4, 2e-4),
    ("sin_vs_shift", 1e-4, 4e-4),
)


def quadrature_case(name: str, h: float, length: float = 4.0) -> tuple[float, float]:
    """(sampled D(1,1), quadrature D(1,1)) for one named scalar pair."""
    n = int(round(length / h))
    t = np.arange(n) * h
    f = SampledPath(0.0, h, "vector", np.sin(2 * np.pi * t))
    if name == "sin_vs_zero":
        g = SampledPath(0.0, h, "vector", np.zeros(n))
        other = lambda s: 0.0  # noqa: E731
    else:
        g = SampledPath(0.0, h, "vector", np.sin(2 * np.pi * (t + 0.5)))
        other = lambda s: math.sin(2 * math.pi * (s + 0.5))  # noqa: E731
    sampled = window_mean_p(f, g, EUCLIDEAN, 1, 1.0)
    starts = np.linspace(0.0, 1.0, 9)
    exact = quad_window_mean(lambda s: math.sin(2 * math.pi * s), other, 1, 1.0, starts)
    return sampled, exact


def check_quadrature() -> dict:
    rows = []
    for name, h, tol in QUADRATURE_CASES:
        sampled, exact = quadrature_case(name, h)
        rows.append({"case": name, "h": h, "tolerance": tol, "sampled": sampled,
                     "quadrature": exact, "abs_diff": abs(sampled - exact),
                     "ok": abs(sampled - exact) <= tol})
    return {"check": "quadrature", "trials": len(rows), "cases": rows,
            "max_abs_diff": max(r["abs_diff"] for r in rows),
            "mismatches": sum(not r["ok"] for r in rows)}


def check_periods(trials: int, seed: int) -> dict:
    """Per-tau scan values against window-by-window recomputation on random signals."""
    rng = np.random.default_rng(seed)
    diffs = []
    h, n = 0.05, 800
    for _ in range(trials):
        freqs = rng.uniform(0.2, 2.0, size=2)
        amps = rng.uniform(0.2, 1.0, size=2)
        t = np.arange(n) * h
        vals = sum(a * np.sin(2 * np.pi * fr * t + ph)
                   for a, fr, ph in zip(amps, freqs, rng.uniform(0, 2 * np.pi, 2)))
        f = SampledPath(0.0, h, "vector", vals)
        kind = TRUNCATED_EUCLIDEAN if rng.random() < 0.5 else EUCLIDEAN
        p = float(rng.choice([1, 2]))
        scan = scan_values(f, kind, p, 4.0, 0.1, 10.0)
        shifts = scan.grid * 2
        ref = direct_period_values(vals, shifts, p, 80, truncated=kind.truncated)
        diffs.extend(abs(a - b) for a, b in zip(scan.values.tolist(), ref)
                     if not (math.isnan(a) and math.isnan(b)))
    return _summary("periods", diffs, ORACLE_TOL, {"signals": trials, "seed": seed})


def run_check(check: str, trials: int, max_support: int, seed: int) -> dict:
    if check == "lp":
        return check_lp(trials, max_support, seed)
    if check == "hausdorff":
        return check_hausdorff(trials, max_support, seed)
    if check == "r_delta":
        return check_r_delta(trials, max_support, seed)
    if check == "quadrature":
        return check_quadrature()
    if check == "periods":
        return check_periods(max(1, trials // 20), seed)
    raise ValueError(check)


CHECKS = ("lp", "hausdorff", "r_delta", "quadrature", "periods")
