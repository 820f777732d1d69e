import math

import numpy as np
import pytest

from weylkit.errors import InputError
from weylkit.generators import FrequencySpec, Grid, measure_suite, theorem_suite
from weylkit.metric_core import FiniteMeasure, r_delta
from weylkit.oracles import r_delta_bruteforce
from weylkit.sampled_path import SampledPath
from weylkit.selection import (
    PROXY_LABEL,
    ScanParams,
    SlackFunction,
    calibration_ladder,
    measure_selection,
    nearest_point_selection,
    verify_thm1,
    verify_thm3,
)

N, H = 400, 0.05
ETA = SlackFunction.parse("0:0,1:0.5")


def const_vec(v, n=N):
    return SampledPath(0.0, H, "vector", np.full((n, 1), float(v)))


def const_set(vals, n=N):
    return SampledPath(0.0, H, "set", np.tile(np.asarray(vals, float)[None, :, None], (n, 1, 1)))


def const_measure(locs, weights, n=N):
    pts = np.tile(np.asarray(locs, float)[None, :, None], (n, 1, 1))
    return SampledPath(0.0, H, "measure", pts, np.tile(np.asarray(weights, float), (n, 1)))


def test_nearest_point_examples():
    r = nearest_point_selection(const_vec(0), const_set([-1, 2]), ETA)
    assert np.all(r.f.points == -1) and r.violations == 0 and r.membership_ok
    r = nearest_point_selection(const_vec(0), const_set([-1, 1]), ETA)
    assert np.all(r.f.points == -1)


def test_nearest_point_matches_bruteforce():
    t = np.arange(N) * H
    g = SampledPath(0.0, H, "vector", np.sin(2 * np.pi * t))
    u = np.sin(2 * math.sqrt(2) * np.pi * t)
    F = SampledPath(0.0, H, "set", np.stack([u, u + 3], axis=1)[:, :, None])
    r = nearest_point_selection(g, F, ETA)
    for i in range(N):
        opts = sorted([u[i], u[i] + 3], key=lambda v: (abs(v - g.points[i, 0]), v))
        assert r.f.points[i, 0] == opts[0]
    assert r.violations == 0 and r.membership_ok


def test_selection_deterministic():
    s = theorem_suite(h=0.05, length=32.0)
    a = nearest_point_selection(s["g"], s["F"], ETA)
    b = nearest_point_selection(s["g"], s["F"], ETA)
    assert np.array_equal(a.f.points, b.f.points)


def test_measure_selection_examples():
    r = measure_selection(const_vec(0), const_measure([-1, 1], [0.5, 0.5]), 0.6)
    assert np.all(r.f.points == -1) and r.violations == 0
    assert r.rhs[0] == pytest.approx(1.6)
    r = measure_selection(const_vec(0), const_measure([0.2, 5], [0.5, 0.5]), 0.4)
    assert np.all(r.f.points == 0.2) and r.rhs[0] == pytest.approx(0.6)
    mu = FiniteMeasure([[0.2], [5.0]], [0.5, 0.5])
    assert r_delta([0.0], mu, 0.4) == r_delta_bruteforce([0.0], mu, 0.4) == pytest.approx(0.2)


def test_measure_selection_dirac():
    t = np.arange(N) * H
    x = np.sin(2 * np.pi * t)
    mu = SampledPath(0.0, H, "measure", x[:, None, None], np.ones((N, 1)))
    g = const_vec(3.0)
    r = measure_selection(g, mu, 0.5)
    # r_delta is the distance to the single atom, so the bound holds with margin delta
    assert np.array_equal(r.f.points[:, 0], x)
    assert r.violations == 0 and r.worst_margin == pytest.approx(0.5)


def test_measure_selection_suite_membership():
    g = SampledPath(0.0, 0.05, "vector", np.zeros((640, 1)))
    for mu in measure_suite(h=0.05, length=32.0):
        for d in (0.25, 0.75):
            r = measure_selection(g, mu, d)
            assert r.membership_ok and r.violations == 0 and r.fallbacks == 0


def test_selection_input_errors():
    with pytest.raises(InputError):
        nearest_point_selection(const_vec(0), const_vec(0), ETA)
    with pytest.raises(InputError):
        nearest_point_selection(const_vec(0, n=10), const_set([1, 2]), ETA)
    with pytest.raises(InputError):
        measure_selection(const_vec(0), const_measure([0], [1]), 1.0)


@pytest.mark.parametrize("text", ["1:0,2:1", "0:0,1:0.5,0.5:0.7", "0:0,1:-1", "0:0"])
def test_slack_validation(text):
    with pytest.raises(InputError):
        SlackFunction.parse(text)


def test_slack_evaluation():
    eta = SlackFunction.parse("0:0,1:0.5,2:0.6")
    assert eta(0.5) == pytest.approx(0.25) and eta(5.0) == pytest.approx(0.6)
    capped = SlackFunction.capped(0.2)
    assert capped(10.0) < 0.2


def test_calibration_ladder():
    assert calibration_ladder(0.05) == pytest.approx([0.05, 0.1, 0.15, 0.25, 0.4, 1.0])
    assert calibration_ladder(0.2) == pytest.approx([0.2, 0.4, 0.6, 1.0, 1.6])


@pytest.fixture(scope="module")
def small_suite():
    return theorem_suite(h=0.05, length=64.0)


def test_thm1_constant_F(small_suite):
    g = small_suite["g"]
    # |g| < 0.5, so -1 is always the nearest point and f is constant
    F = SampledPath(g.t0, g.h, "set", np.tile(np.array([[-1.0], [2.0]])[None], (g.n, 1, 1)))
    rep = verify_thm1(g, F, ETA, [0.05, 0.1], ScanParams(4.0, 0.05, 8.0, check_doubling=False))
    for row in rep["containment_curve"]:
        assert row["contained"] and row["eps_prime"] == row["eps"]
    assert rep["containment_label"] == PROXY_LABEL
    assert {"h", "tau_step", "edge_loss"} <= set(rep["discretization"])


def test_thm1_large_eps_full_grid(small_suite):
    rep = verify_thm1(small_suite["g"], small_suite["F"], ETA, [5.0],
                      ScanParams(4.0, 0.05, 8.0, check_doubling=False))
    row = rep["containment_curve"][0]
    assert row["target_size"] == 2 * 160 + 1
    assert row["contained"]


def test_thm3_constant_h_reduces_to_thm1(small_suite):
    g, F = small_suite["g"], small_suite["F"]
    flat = SampledPath(g.t0, g.h, "vector", np.zeros((g.n, 1)))
    params = ScanParams(4.0, 0.05, 8.0, check_doubling=False)
    r3 = verify_thm3(g, F, flat, 0.2, [0.05, 0.1], params)
    r1 = verify_thm1(g, F, SlackFunction.capped(0.2), [0.05, 0.1], params)
    assert [r["eps_prime"] for r in r3["containment_curve"]] == \
        [r["eps_prime"] for r in r1["containment_curve"]]


def test_thm3_strict_bound_at_fixed_distance():
    g = const_vec(0.3)
    t = np.arange(N) * H
    F = SampledPath(0.0, H, "set", np.stack([np.zeros(N), np.full(N, -2.0)], axis=1)[:, :, None])
    hs = SampledPath(0.0, H, "vector", np.sin(2 * np.pi * t))
    rep = verify_thm3(g, F, hs, 0.5, [0.1], ScanParams(2.0, 0.05, 4.0, check_doubling=False))
    assert rep["strict_bound"]["violations"] == 0
    assert rep["strict_bound"]["worst_margin"] == pytest.approx(0.5)
