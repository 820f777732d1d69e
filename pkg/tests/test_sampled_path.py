import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weylkit.errors import InputError
from weylkit.metric_core import (
    EUCLIDEAN,
    HAUSDORFF,
    LEVY_PROKHOROV,
    TRUNCATED_EUCLIDEAN,
    FiniteMeasure,
    FiniteSet,
)
from weylkit.oracles import direct_window_sup, quad_window_mean
from weylkit.sampled_path import (
    GridMask,
    SampledPath,
    common_overlap,
    masked_window_mean,
    round_to_grid,
    shift,
    window_mean_p,
    window_sup,
)


def sine_path(h, length=4.0, phase_shift=0.0):
    t = np.arange(int(round(length / h))) * h
    return SampledPath(0.0, h, "vector", np.sin(2 * np.pi * (t + phase_shift)))


def zeros(f):
    return SampledPath(f.t0, f.h, "vector", np.zeros_like(f.points))


# quadrature reference values, computed once per session
@pytest.fixture(scope="module")
def quad_refs():
    s = lambda t: math.sin(2 * math.pi * t)  # noqa: E731
    starts = np.linspace(0, 1, 5)
    return {
        "zero": quad_window_mean(s, lambda t: 0.0, 1, 1.0, starts),
        "half": quad_window_mean(s, lambda t: math.sin(2 * math.pi * (t + 0.5)), 1, 1.0, starts),
    }


def test_quadrature_oracle_values(quad_refs):
    assert quad_refs["zero"] == pytest.approx(2 / math.pi, abs=1e-9)
    assert quad_refs["half"] == pytest.approx(4 / math.pi, abs=1e-9)


def test_sine_against_zero(quad_refs):
    f = sine_path(1e-4)
    assert abs(window_mean_p(f, zeros(f), EUCLIDEAN, 1, 1.0) - quad_refs["zero"]) <= 2e-4


def test_sine_against_half_shift(quad_refs):
    f, g = sine_path(1e-4), sine_path(1e-4, phase_shift=0.5)
    assert abs(window_mean_p(f, g, EUCLIDEAN, 1, 1.0) - quad_refs["half"]) <= 4e-4


def test_self_distance_zero():
    f = sine_path(0.01)
    assert window_mean_p(f, f, EUCLIDEAN, 2, 1.0) == 0.0


def test_shift_examples():
    f = sine_path(0.01)
    same = shift(f, 0.0)
    assert same.cells == 0 and same.rounding_error == 0.0
    assert np.array_equal(same.path.points, f.points)
    r = shift(f, 0.503)
    assert r.cells == 50
    assert r.rounding_error == pytest.approx(0.003, abs=1e-12)


def test_shift_inverse_on_overlap():
    f = sine_path(0.01)
    back = shift(shift(f, 0.37).path, -0.37).path
    a, b = common_overlap(f, back)
    assert np.array_equal(a.points, b.points)


@given(st.floats(-3.9, 3.9))
def test_shift_rounding_bound(tau):
    f = sine_path(0.01)
    assert shift(f, tau).rounding_error <= f.h / 2 + 1e-12


def test_shift_too_far():
    with pytest.raises(InputError):
        shift(sine_path(0.01), 4.0)


def test_grid_and_window_errors():
    f = sine_path(0.01)
    other = SampledPath(0.0, 0.02, "vector", np.zeros(200))
    with pytest.raises(InputError):
        window_mean_p(f, other, EUCLIDEAN, 1, 1.0)
    with pytest.raises(InputError):
        window_mean_p(f, f, EUCLIDEAN, 1, 5.0)
    with pytest.raises(InputError):
        window_mean_p(f, f, EUCLIDEAN, 0.5, 1.0)
    with pytest.raises(InputError):
        window_mean_p(f, f, HAUSDORFF, 1, 1.0)


def test_round_to_grid():
    r = round_to_grid(1.004, 0.01)
    assert r.cells == 100 and r.error == pytest.approx(0.004)


@given(st.lists(st.floats(-10, 10), min_size=5, max_size=60), st.integers(1, 5))
def test_window_sup_matches_direct(values, w):
    x = np.asarray(values)
    assert window_sup(x, w) == pytest.approx(direct_window_sup(x, w), abs=1e-9)


def test_masked_examples():
    f = SampledPath(0.0, 0.01, "vector", np.full((400, 1), 2.0))
    x0 = np.zeros(1)
    none = GridMask.like(f, np.zeros(f.n, bool))
    assert masked_window_mean(f, x0, none, 1, 1.0) == 0.0
    full = GridMask.like(f, np.ones(f.n, bool))
    assert masked_window_mean(zeros(f), x0, full, 1, 1.0) == 0.0
    half = GridMask.from_times(f, lambda t: (t + 1e-9) % 1.0 < 0.5)
    # direct sum: 50 flagged cells of value 2 in every unit window
    assert masked_window_mean(f, x0, half, 1, 1.0) == pytest.approx(1.0, abs=1e-12)


@st.composite
def vector_triples(draw):
    n = draw(st.integers(8, 30))
    arr = st.lists(st.floats(-3, 3), min_size=n, max_size=n)
    return [SampledPath(0.0, 0.1, "vector", np.asarray(draw(arr))) for _ in range(3)]


@given(vector_triples(), st.sampled_from([1.0, 2.0, 3.0]), st.integers(1, 8))
def test_window_metric_symmetry_and_triangle(paths, p, cells):
    f, g, k = paths
    l = cells * 0.1
    for kind in (EUCLIDEAN, TRUNCATED_EUCLIDEAN):
        fg = window_mean_p(f, g, kind, p, l)
        assert fg == window_mean_p(g, f, kind, p, l)
        assert window_mean_p(f, k, kind, p, l) <= fg + window_mean_p(g, k, kind, p, l) + 1e-9


def test_periodic_doubling_non_increasing():
    f = sine_path(0.01, length=16.0, phase_shift=0.1)
    g = zeros(f)
    vals = [window_mean_p(f, g, EUCLIDEAN, 2, l) for l in (1.0, 2.0, 4.0, 8.0)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


@given(st.lists(st.booleans(), min_size=40, max_size=40),
       st.lists(st.booleans(), min_size=40, max_size=40))
def test_masked_mean_monotone(a, b):
    f = SampledPath(0.0, 0.1, "vector", np.sin(np.arange(40.0)))
    ma = GridMask.like(f, a)
    mb = ma | GridMask.like(f, b)
    x0 = np.zeros(1)
    assert masked_window_mean(f, x0, ma, 1, 1.0) <= masked_window_mean(f, x0, mb, 1, 1.0) + 1e-15


def test_set_and_measure_paths():
    sets = [FiniteSet([[0.0], [float(i)]]) for i in range(1, 5)]
    F = SampledPath.from_values(sets, 0.0, 1.0)
    assert F.role == "set" and F[2] == sets[2]
    ms = [FiniteMeasure.dirac([float(i)]) for i in range(4)]
    M = SampledPath.from_values(ms, 0.0, 1.0)
    assert M.role == "measure"
    assert window_mean_p(M, M, LEVY_PROKHOROV, 1, 2.0) == 0.0


def test_path_validation():
    with pytest.raises(InputError):
        SampledPath(0.0, 0.0, "vector", np.zeros(4))
    with pytest.raises(InputError):
        SampledPath(0.0, 0.1, "vector", np.zeros(1))
    with pytest.raises(InputError):
        SampledPath(0.0, 0.1, "vector", np.array([0.0, np.nan]))
    with pytest.raises(InputError):
        SampledPath(0.0, 0.1, "measure", np.zeros((3, 2, 1)), np.ones((3, 3)))
