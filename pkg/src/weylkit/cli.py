"""``weylkit`` command line: generate paths, analyze them, emit JSON reports.

Exit codes: 0 success, 1 verification failure, 2 input error (a JSON error
object is written to stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import trials
from .almost_period import default_jobs, intersect, scan_values
from .errors import InputError
from .generators import (
    FrequencySpec,
    Grid,
    MeasureComponent,
    cb_panel_check,
    dense_module_signal,
    measure_valued_path,
    quasi_periodic_signal,
    set_valued_path,
)
from .metric_core import FiniteSet, MetricKind
from .pathio import read_mask, read_path, write_path
from .sampled_path import SampledPath
from .selection import (
    ScanParams,
    SlackFunction,
    measure_selection,
    nearest_point_selection,
    verify_thm1,
    verify_thm3,
)
from .weyl_metrics import (
    compactness_diagnostic,
    d_p_limit,
    d_pl_report,
    kappa_w,
    mstar_diagnostic,
)

SCHEMA = 1


class VerificationFailed(Exception):
    pass


# ---------------------------------------------------------------- output

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _emit(report: dict, out: str | None):
    text = dumps_report(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from exc


# ---------------------------------------------------------------- gen

def _freq_spec(d, seed: int | None) -> FrequencySpec:
    if not isinstance(d, dict) or "terms" not in d:
        raise InputError("a signal needs a 'terms' list")
    if seed is not None and "seed" not in d:
        d = {**d, "seed": seed}
    return FrequencySpec.from_json(d)


def build_from_config(cfg: dict, seed: int | None = None) -> SampledPath:
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    if cfg.get("schema") != SCHEMA:
        raise InputError(f"config needs \"schema\": {SCHEMA}")
    try:
        grid = Grid.from_json(cfg["grid"])
        kind = cfg["generator"]
        if kind == "quasi_periodic":
            return quasi_periodic_signal(_freq_spec(cfg["signal"], seed), grid)
        if kind == "dense_module":
            return dense_module_signal(int(cfg.get("K", 8)), grid, cfg.get("frequencies"))
        if kind == "set_valued":
            scale = cfg.get("scale")
            return set_valued_path(FiniteSet(np.asarray(cfg["S0"], float)),
                                   _freq_spec(cfg["translate"], seed),
                                   None if scale is None else _freq_spec(scale, seed), grid)
        if kind == "measure_valued":
            comps = [MeasureComponent(_freq_spec(c["weight"], seed),
                                      _freq_spec(c["location"], seed))
                     for c in cfg["components"]]
            return measure_valued_path(comps, grid, float(cfg.get("floor", 0.01)))
    except KeyError as exc:
        raise InputError(f"config is missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed config: {exc}") from exc
    raise InputError(f"unknown generator {kind!r}")


def _load_config(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def cmd_gen(args) -> int:
    f = build_from_config(_load_config(args.spec), args.seed)
    write_path(f, args.out)
    return 0


# ---------------------------------------------------------------- analyze

def _zero_like(f: SampledPath) -> SampledPath:
    if f.role == "vector":
        return SampledPath(f.t0, f.h, "vector", np.zeros_like(f.points))
    pts = np.zeros((f.n, 1, f.dim))
    weights = np.ones((f.n, 1)) if f.role == "measure" else None
    return SampledPath(f.t0, f.h, f.role, pts, weights)


def _kind(args, f: SampledPath) -> MetricKind:
    if args.kind:
        return MetricKind.parse(args.kind)
    return MetricKind.for_role(f.role)


def _discretization(rep, h: float, tau_step: float | None = None) -> dict:
    return {"h": h, "tau_step": tau_step, "edge_loss": rep.edge_loss, "rounding": rep.rounding}


def cmd_analyze(args) -> int:
    ladder = _floats(args.ladder) if args.ladder else None
    if args.metric == "kappa_w":
        if not args.mask:
            raise InputError("kappa_w needs --mask")
        mask = read_mask(args.mask)
        rep = kappa_w(mask, ladder)
        out = rep.to_json()
        out["discretization"] = _discretization(rep, mask.h)
        _emit(out, args.out)
        return 0
    if not args.a:
        raise InputError(f"{args.metric} needs --a")
    f = read_path(args.a)
    if args.metric in ("d_pl", "d_p_limit"):
        if not args.b:
            raise InputError(f"{args.metric} needs --b (a path file or 'zero')")
        g = _zero_like(f) if args.b == "zero" else read_path(args.b)
        kind = _kind(args, f)
        if args.metric == "d_pl":
            if args.l is None:
                raise InputError("d_pl needs --l")
            rep = d_pl_report(f, g, kind, args.p, args.l)
        else:
            rep = d_p_limit(f, g, kind, args.p, ladder)
        out = rep.to_json()
    elif args.metric == "mstar":
        x0 = np.asarray(_floats(args.x0), float) if args.x0 else np.zeros(f.dim)
        if f.role != "vector":
            raise InputError("mstar runs on vector paths")
        res = mstar_diagnostic(f, x0, args.p, args.delta, ladder, _kind(args, f))
        rep = res.report
        out = rep.to_json()
    elif args.metric == "compactness":
        if args.eps is None:
            raise InputError("compactness needs --eps")
        res = compactness_diagnostic(f, args.eps, args.delta, ladder,
                                     MetricKind.parse(args.kind) if args.kind else None)
        rep = res.report
        out = rep.to_json()
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(args.metric)
    out["discretization"] = _discretization(rep, f.h)
    _emit(out, args.out)
    return 0


# ---------------------------------------------------------------- periods

def _scan_defaults(f: SampledPath, tau_step, t_max):
    return (tau_step if tau_step else f.h), (t_max if t_max else f.length / 4)


def cmd_periods(args) -> int:
    f = read_path(args.inp)
    tau_step, t_max = _scan_defaults(f, args.tau_step, args.t_max)
    jobs = args.jobs or default_jobs()
    scan = scan_values(f, _kind(args, f), args.p, args.l, tau_step, t_max, jobs)
    aps = scan.periods(args.eps)
    out = {"command": "periods", "input": aps.to_json()}
    if args.intersect:
        sets = [aps]
        for other in args.intersect:
            g = read_path(other)
            sets.append(scan_values(g, MetricKind.for_role(g.role), args.p, args.l,
                                    tau_step, t_max, jobs).periods(args.eps))
        out["intersection"] = intersect(sets).to_json()
    out["discretization"] = {"h": f.h, "tau_step": tau_step, "t_max": scan.t_max,
                             "edge_loss": scan.l / f.length, "rounding": scan.rounding}
    _emit(out, args.out)
    return 0


# ---------------------------------------------------------------- select / verify

def cmd_select(args) -> int:
    g = read_path(args.g)
    if args.theorem == 1:
        if not args.F:
            raise InputError("theorem 1 selection needs --F")
        sel = nearest_point_selection(g, read_path(args.F), SlackFunction.parse(args.eta))
    else:
        if not args.mu:
            raise InputError("theorem 2 selection needs --mu")
        sel = measure_selection(g, read_path(args.mu), args.delta)
    write_path(sel.f, args.out)
    report = sel.to_json()
    report["theorem"] = args.theorem
    report["discretization"] = {"h": g.h, "tau_step": None, "edge_loss": 0.0, "rounding": {}}
    _emit(report, args.report)
    if not sel.membership_ok or sel.violations or sel.fallbacks:
        raise VerificationFailed("selection failed membership or the bound")
    return 0


def verification_ok(report: dict) -> bool:
    ok = report["membership_ok"] and report["bound"]["violations"] == 0
    ok = ok and all(row["contained"] for row in report["containment_curve"])
    if "strict_bound" in report:
        ok = ok and report["strict_bound"]["violations"] == 0
    return bool(ok)


def cmd_verify(args) -> int:
    g = read_path(args.g)
    F = read_path(args.F)
    ladder = _floats(args.eps_ladder)
    tau_step, t_max = _scan_defaults(g, args.tau_step, args.t_max)
    params = ScanParams(args.l, tau_step, t_max, args.jobs or default_jobs(),
                        check_doubling=not args.no_doubling)
    if args.theorem == 1:
        report = verify_thm1(g, F, SlackFunction.parse(args.eta), ladder, params)
    else:
        if not args.h:
            raise InputError("theorem 3 verification needs --h")
        report = verify_thm3(g, F, read_path(args.h), args.delta, ladder, params)
    _emit(report, args.out)
    if not verification_ok(report):
        raise VerificationFailed("verification failed")
    return 0


def cmd_panel(args) -> int:
    mu = read_path(args.inp)
    tau_step, t_max = _scan_defaults(mu, args.tau_step, args.t_max)
    res = cb_panel_check(mu, args.panel_size, args.eps, args.l, tau_step, t_max,
                         args.jobs or default_jobs())
    out = res.to_json()
    out["discretization"] = {"h": mu.h, "tau_step": tau_step, "t_max": t_max,
                             "edge_loss": args.l / mu.length}
    _emit(out, args.out)
    return 0


# ---------------------------------------------------------------- oracle

def cmd_oracle(args) -> int:
    checks = trials.CHECKS if args.check == "all" else (args.check,)
    results = [trials.run_check(c, args.trials, args.max_support, args.seed) for c in checks]
    total = sum(r["mismatches"] for r in results)
    _emit({"command": "oracle", "results": results, "mismatches": total,
           "discretization": {"h": None, "tau_step": None, "edge_loss": None,
                              "rounding": "quadrature cases use h=1e-4"}}, args.out)
    if total:
        raise VerificationFailed(f"{total} oracle mismatches")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weylkit", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=None, help="seed for every stochastic choice")
    ap.add_argument("--jobs", type=int, default=None, help="worker cap (env WEYLKIT_JOBS)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated path from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="global Weyl-type metrics")
    p.add_argument("--metric", required=True,
                   choices=["d_pl", "d_p_limit", "kappa_w", "mstar", "compactness"])
    p.add_argument("--a")
    p.add_argument("--b", help="second path or 'zero'")
    p.add_argument("--mask")
    p.add_argument("--kind")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--l", type=float)
    p.add_argument("--ladder", help="comma-separated window lengths")
    p.add_argument("--x0")
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--eps", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("periods", help="almost-period scan and inclusion length")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--kind")
    p.add_argument("--tau-step", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--intersect", nargs="*", default=[])
    p.add_argument("--out")
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("select", help="nearest-point (1) or support-point (2) selection")
    p.add_argument("--theorem", type=int, choices=[1, 2], required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--F")
    p.add_argument("--mu")
    p.add_argument("--eta", default="0:0,1:0.5")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("verify", help="selection plus almost-period containment pipeline")
    p.add_argument("--theorem", type=int, choices=[1, 3], required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--F", required=True)
    p.add_argument("--h")
    p.add_argument("--eta", default="0:0,1:0.5")
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--eps-ladder", default="0.05,0.1,0.2")
    p.add_argument("--l", type=float, default=8.0)
    p.add_argument("--tau-step", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--no-doubling", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("panel", help="test-function panel check of a measure path")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--panel-size", type=int, default=9)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--tau-step", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_panel)

    p = sub.add_parser("oracle", help="diff fast paths against brute-force oracles")
    p.add_argument("--check", default="all", choices=list(trials.CHECKS) + ["all"])
    p.add_argument("--max-support", type=int, default=8)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "oracle" and args.seed is None:
        args.seed = 0
    if args.jobs is not None and args.jobs < 1:
        sys.stderr.write(json.dumps({"error": "input", "message": "--jobs must be >= 1"}) + "\n")
        return 2
    try:
        return args.func(args)
    except VerificationFailed as exc:
        sys.stderr.write(json.dumps({"error": "verification", "message": str(exc)}) + "\n")
        return 1
    except InputError as exc:
        sys.stderr.write(json.dumps({"error": "input", "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
