import json
import math

import pytest

from weylkit.cli import build_from_config, dumps_report, main
from weylkit.errors import InputError
from weylkit.pathio import read_path


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def sine_spec(h, **grid):
    return {"schema": 1, "generator": "quasi_periodic", "grid": {"t0": 0, "h": h, **grid},
            "signal": {"terms": [{"freq": 1, "amp": 1, "phase": 0}]}}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_then_d_pl(tmp_path, capsys):
    spec = write_json(tmp_path / "g.json", sine_spec(1e-3, n=4000))
    out = tmp_path / "g.csv"
    assert run(capsys, "gen", "--spec", spec, "--out", out)[0] == 0
    code, text, _ = run(capsys, "analyze", "--metric", "d_pl", "--p", 1, "--l", 1,
                        "--a", out, "--b", "zero")
    rep = json.loads(text)
    assert code == 0 and abs(rep["value"] - 2 / math.pi) <= 2e-4
    assert {"h", "edge_loss", "rounding"} <= set(rep["discretization"])


def test_periods_on_sine(tmp_path, capsys):
    spec = write_json(tmp_path / "s.json", sine_spec(0.02, length=64))
    path = tmp_path / "sin.csv"
    run(capsys, "gen", "--spec", spec, "--out", path)
    code, text, _ = run(capsys, "periods", "--eps", 0.05, "--l", 8, "--in", path)
    rep = json.loads(text)
    assert code == 0
    taus = rep["input"]["taus"]
    assert taus == [float(k) for k in range(-16, 17)]
    assert rep["input"]["inclusion_length"] == pytest.approx(1.0)
    assert rep["discretization"]["tau_step"] == 0.02


def test_periods_intersect(tmp_path, capsys):
    spec = write_json(tmp_path / "s.json", sine_spec(0.02, length=64))
    half = sine_spec(0.02, length=64)
    half["signal"]["terms"][0]["freq"] = 0.5
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "gen", "--spec", spec, "--out", a)
    run(capsys, "gen", "--spec", write_json(tmp_path / "h.json", half), "--out", b)
    code, text, _ = run(capsys, "periods", "--eps", 0.05, "--l", 8, "--in", a, "--intersect", b)
    assert code == 0
    assert json.loads(text)["intersection"]["taus"] == [float(k) for k in range(-16, 17, 2)]


def test_oracle_lp(capsys):
    code, text, _ = run(capsys, "oracle", "--check", "lp", "--max-support", 8, "--trials", 200)
    rep = json.loads(text)
    assert code == 0 and rep["mismatches"] == 0 and rep["results"][0]["trials"] == 200


def test_reports_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(capsys, "--seed", 3, "oracle", "--check", "hausdorff", "--trials", 30,
                   "--out", out)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_threads_into_generators(tmp_path, capsys):
    spec = sine_spec(0.05, n=100)
    spec["signal"]["terms"][0]["phase"] = None
    cfg = write_json(tmp_path / "r.json", spec)
    outs = []
    for seed in (1, 1, 2):
        p = tmp_path / f"r{len(outs)}.csv"
        run(capsys, "--seed", seed, "gen", "--spec", cfg, "--out", p)
        outs.append(p.read_text())
    assert outs[0] == outs[1] != outs[2]


def test_select_and_verify(tmp_path, capsys):
    grid = {"t0": 0, "h": 0.05, "length": 64}
    g = {"schema": 1, "generator": "quasi_periodic", "grid": grid,
         "signal": {"terms": [{"freq": 1, "amp": 0.15, "phase": 0},
                              {"freq": 2 ** 0.5, "amp": 0.15, "phase": 0}]}}
    F = {"schema": 1, "generator": "set_valued", "grid": grid, "S0": [[-1], [1]],
         "translate": {"terms": [{"freq": 1, "amp": 0.15, "phase": 0},
                                 {"freq": 3 ** 0.5, "amp": 0.15, "phase": 0}]}}
    for name, cfg in (("g", g), ("F", F)):
        run(capsys, "gen", "--spec", write_json(tmp_path / f"{name}.json", cfg),
            "--out", tmp_path / f"{name}.csv")
    code, _, _ = run(capsys, "select", "--theorem", 1, "--g", tmp_path / "g.csv",
                     "--F", tmp_path / "F.csv", "--out", tmp_path / "f.csv",
                     "--report", tmp_path / "sel.json")
    rep = json.loads((tmp_path / "sel.json").read_text())
    assert code == 0 and rep["membership_ok"] and rep["bound"]["violations"] == 0
    assert read_path(tmp_path / "f.csv").role == "vector"
    code, text, _ = run(capsys, "--jobs", 2, "verify", "--theorem", 1, "--g", tmp_path / "g.csv",
                        "--F", tmp_path / "F.csv", "--l", 4, "--tau-step", 0.05,
                        "--t-max", 8, "--no-doubling")
    rep = json.loads(text)
    assert rep["theorem"] == 1 and "containment_curve" in rep
    assert code == (0 if all(r["contained"] for r in rep["containment_curve"]) else 1)


def test_measure_select(tmp_path, capsys):
    grid = {"t0": 0, "h": 0.1, "n": 200}
    mu = {"schema": 1, "generator": "measure_valued", "grid": grid, "components": [
        {"weight": {"terms": [{"freq": 1}]}, "location": {"terms": [{"freq": 1, "amp": 0.5}]}},
        {"weight": {"terms": [{"freq": 2 ** 0.5}]},
         "location": {"terms": [{"freq": 3 ** 0.5, "amp": 0.5}], "offset": 2}}]}
    g = sine_spec(0.1, n=200)
    run(capsys, "gen", "--spec", write_json(tmp_path / "mu.json", mu), "--out", tmp_path / "mu.csv")
    run(capsys, "gen", "--spec", write_json(tmp_path / "g.json", g), "--out", tmp_path / "g.csv")
    code, text, _ = run(capsys, "select", "--theorem", 2, "--g", tmp_path / "g.csv",
                        "--mu", tmp_path / "mu.csv", "--delta", 0.5, "--out", tmp_path / "f.csv")
    assert code == 0 and json.loads(text)["fallbacks"] == 0


def test_kappa_from_mask(tmp_path, capsys):
    rows = "\n".join(f"{i * 0.1:.17g},{int(i % 4 == 0)}" for i in range(400))
    (tmp_path / "m.csv").write_text("t,mask\n" + rows + "\n")
    code, text, _ = run(capsys, "analyze", "--metric", "kappa_w", "--mask", tmp_path / "m.csv",
                        "--ladder", "1,2,4,8")
    assert code == 0 and json.loads(text)["value"] == pytest.approx(0.25, abs=0.02)


def test_mstar_and_compactness(tmp_path, capsys):
    spec = write_json(tmp_path / "s.json", sine_spec(0.01, length=64))
    run(capsys, "gen", "--spec", spec, "--out", tmp_path / "s.csv")
    code, text, _ = run(capsys, "analyze", "--metric", "mstar", "--a", tmp_path / "s.csv",
                        "--delta", 0.25)
    assert code == 0 and abs(json.loads(text)["value"] - 2 * math.cos(3 * math.pi / 8) / math.pi) < 1e-2
    code, text, _ = run(capsys, "analyze", "--metric", "compactness", "--a", tmp_path / "s.csv",
                        "--eps", 0.2, "--delta", 0.1)
    assert code == 0 and json.loads(text)["satisfied"]


@pytest.mark.parametrize("cfg", [
    {"generator": "quasi_periodic"},
    {"schema": 1, "generator": "nope", "grid": {"h": 0.1, "n": 10}},
    {"schema": 1, "generator": "quasi_periodic", "grid": {"h": 0.1, "n": 10}},
    {"schema": 1, "generator": "quasi_periodic", "grid": {"h": -1, "n": 10},
     "signal": {"terms": [{"freq": 1}]}},
])
def test_malformed_config_exit_2(tmp_path, capsys, cfg):
    code, _, err = run(capsys, "gen", "--spec", write_json(tmp_path / "c.json", cfg),
                       "--out", tmp_path / "x.csv")
    assert code == 2 and json.loads(err)["error"] == "input"


def test_bad_json_and_missing_file(tmp_path, capsys):
    (tmp_path / "c.json").write_text("{not json")
    assert run(capsys, "gen", "--spec", tmp_path / "c.json", "--out", tmp_path / "x")[0] == 2
    code, _, err = run(capsys, "periods", "--eps", 0.1, "--l", 1, "--in", tmp_path / "none.csv")
    assert code == 2 and "cannot read" in json.loads(err)["message"]


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "--jobs", 0, "oracle")[0] == 2


def test_build_from_config_requires_schema():
    with pytest.raises(InputError):
        build_from_config({"schema": 2})


def test_report_json_cleans_nan():
    assert json.loads(dumps_report({"a": float("nan"), "b": [1.0]})) == {"a": None, "b": [1.0]}
