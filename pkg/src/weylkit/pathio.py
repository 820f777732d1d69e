"""CSV files for sampled paths and masks.

Layout::

    # weylkit-path t0=0.0 h=0.01 role=vector
    t,role,c0,c1
    0,vector,0.5,1.25

Set rows carry a JSON array of points in a single ``payload`` column and
measure rows a JSON object ``{"support": [...], "weights": [...]}``.  Floats
are written with 17 significant digits (JSON payloads use the shortest
round-trip repr), so reading a written path gives back identical values.
The leading comment fixes ``t0`` and ``h`` exactly; without it they are
inferred from the ``t`` column.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .metric_core import pad_measures
from .sampled_path import GridMask, SampledPath

_MAGIC = "# weylkit-path"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_path(f: SampledPath) -> str:
    buf = io.StringIO()
    buf.write(f"{_MAGIC} t0={f.t0!r} h={f.h!r} role={f.role}\n")
    w = csv.writer(buf, lineterminator="\n")
    times = f.times
    if f.role == "vector":
        w.writerow(["t", "role"] + [f"c{j}" for j in range(f.dim)])
        for t, row in zip(times, f.points):
            w.writerow([_fmt(t), "vector"] + [_fmt(v) for v in row])
    elif f.role == "set":
        w.writerow(["t", "role", "payload"])
        for i, t in enumerate(times):
            w.writerow([_fmt(t), "set", json.dumps(f[i].to_json())])
    else:
        w.writerow(["t", "role", "payload"])
        for i, t in enumerate(times):
            keep = f.weights[i] > 0
            payload = {"support": f.points[i][keep].tolist(),
                       "weights": f.weights[i][keep].tolist()}
            w.writerow([_fmt(t), "measure", json.dumps(payload)])
    return buf.getvalue()


def write_path(f: SampledPath, target) -> None:
    Path(target).write_text(dumps_path(f))


def _parse_meta(line: str) -> dict:
    meta = {}
    for item in line[len(_MAGIC):].split():
        key, _, value = item.partition("=")
        meta[key] = value
    return meta


def loads_path(text: str) -> SampledPath:
    lines = text.splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            if line.startswith(_MAGIC):
                meta = _parse_meta(line)
            continue
        if line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows or rows[0][:2] != ["t", "role"]:
        raise InputError("path file must start with a 't,role,...' header")
    rows = rows[1:]
    if len(rows) < 2:
        raise InputError("path file needs at least 2 samples")
    roles = {r[1] for r in rows}
    if len(roles) != 1:
        raise InputError(f"mixed roles in path file: {sorted(roles)}")
    role = roles.pop()
    try:
        times = np.array([float(r[0]) for r in rows])
        if role == "vector":
            pts = np.array([[float(v) for v in r[2:]] for r in rows])
            weights = None
        elif role == "set":
            sets = [np.asarray(json.loads(r[2]), dtype=float) for r in rows]
            sets = [s[:, None] if s.ndim == 1 else s for s in sets]
            k = max(len(s) for s in sets)
            pts = np.stack([np.concatenate([s, np.repeat(s[-1:], k - len(s), axis=0)])
                            for s in sets])
            weights = None
        elif role == "measure":
            objs = [json.loads(r[2]) for r in rows]
            k = max(len(o["weights"]) for o in objs)
            sup, wts = [], []
            for o in objs:
                s = np.asarray(o["support"], dtype=float)
                s = s[:, None] if s.ndim == 1 else s
                ps, pw = pad_measures(s[None], np.asarray(o["weights"], float)[None], k)
                sup.append(ps[0])
                wts.append(pw[0])
            pts, weights = np.stack(sup), np.stack(wts)
        else:
            raise InputError(f"unknown role {role!r}")
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed path file: {exc}") from exc
    if "h" in meta:
        t0, h = float(meta["t0"]), float(meta["h"])
    else:
        t0, h = times[0], (times[-1] - times[0]) / (len(times) - 1)
    return SampledPath(t0, h, role, pts, weights)


def read_path(source) -> SampledPath:
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc}") from exc
    return loads_path(text)


def write_mask(mask: GridMask, target) -> None:
    buf = io.StringIO()
    buf.write(f"{_MAGIC} t0={mask.t0!r} h={mask.h!r} role=mask\n")
    buf.write("t,mask\n")
    for i, flag in enumerate(mask.flags):
        buf.write(f"{_fmt(mask.t0 + i * mask.h)},{int(flag)}\n")
    Path(target).write_text(buf.getvalue())


def read_mask(source) -> GridMask:
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc}") from exc
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith(_MAGIC):
            meta = _parse_meta(line)
        elif line.strip() and not line.startswith("#"):
            rows.append(line.split(","))
    if not rows or rows[0] != ["t", "mask"]:
        raise InputError("mask file must start with a 't,mask' header")
    try:
        times = np.array([float(r[0]) for r in rows[1:]])
        flags = np.array([int(r[1]) != 0 for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise InputError(f"malformed mask file: {exc}") from exc
    if "h" in meta:
        t0, h = float(meta["t0"]), float(meta["h"])
    else:
        t0, h = times[0], (times[-1] - times[0]) / (len(times) - 1)
    return GridMask(t0, h, flags)
