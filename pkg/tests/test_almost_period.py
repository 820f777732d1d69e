import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weylkit.almost_period import (
    containment_check,
    inclusion_length,
    intersect,
    near_group_violations,
    path_lipschitz,
    scan_periods,
    scan_values,
)
from weylkit.errors import InputError
from weylkit.metric_core import EUCLIDEAN, TRUNCATED_EUCLIDEAN
from weylkit.oracles import direct_period_values
from weylkit.sampled_path import SampledPath

SQRT2 = math.sqrt(2.0)


def sig(fn, h=0.02, length=64.0):
    t = np.arange(int(round(length / h))) * h
    return SampledPath(0.0, h, "vector", fn(t))


@pytest.fixture(scope="module")
def sine():
    return sig(lambda t: np.sin(2 * np.pi * t))


@pytest.fixture(scope="module")
def qp():
    return sig(lambda t: np.sin(2 * np.pi * t) + np.sin(2 * SQRT2 * np.pi * t), h=0.05,
               length=256.0)


def test_sine_integer_periods(sine):
    aps = scan_periods(sine, EUCLIDEAN, 1, 8.0, 0.05, sine.h, 16.0)
    assert np.allclose(aps.taus, np.arange(-16, 17))
    assert aps.value_at(50) < 1e-12
    assert inclusion_length(aps) == pytest.approx(1.0)


def test_large_epsilon_takes_everything(sine):
    aps = scan_periods(sine, TRUNCATED_EUCLIDEAN, 1, 8.0, 1.1, 0.1, 16.0)
    assert len(aps) == len(aps.grid)
    assert inclusion_length(aps) == pytest.approx(0.1)


def test_quasi_periodic_matches_direct(qp):
    scan = scan_values(qp, EUCLIDEAN, 1, 32.0, 0.05, 32.0)
    ref = direct_period_values(qp.points, scan.grid, 1, 640)
    assert np.array_equal(np.isnan(scan.values), np.isnan(ref))
    assert np.nanmax(np.abs(scan.values - np.asarray(ref))) < 1e-12
    aps = scan.periods(0.2)
    ref_ks = scan.grid[np.asarray(ref) < 0.2]
    assert np.array_equal(aps.ks, ref_ks)


def test_quasi_periodic_inclusion_stable(qp):
    a = inclusion_length(scan_periods(qp, EUCLIDEAN, 1, 32.0, 0.2, 0.05, 32.0))
    b = inclusion_length(scan_periods(qp, EUCLIDEAN, 1, 32.0, 0.2, 0.05, 64.0))
    assert a is not None and b is not None and abs(a - b) <= 2 * 0.05


def test_skipped_taus_reported():
    f = sig(lambda t: np.sin(2 * np.pi * t), length=16.0)
    aps = scan_periods(f, EUCLIDEAN, 1, 10.0, 0.05, 0.5, 8.0)
    assert aps.skipped and all(abs(t) > 6.0 - 1e-9 for t in aps.skipped)
    assert np.isnan(aps.value_at(aps.grid[0]))


def test_few_taus_no_inclusion_length(qp):
    aps = scan_periods(qp, EUCLIDEAN, 1, 32.0, 1e-3, 0.05, 32.0)
    assert list(aps.ks) == [0] and inclusion_length(aps) is None


def test_intersection_identities(sine):
    s = scan_values(sine, EUCLIDEAN, 1, 8.0, 0.02, 16.0)
    a = s.periods(0.05)
    full = s.periods(10.0)
    assert np.array_equal(intersect([a, full]).ks, a.ks)
    assert np.array_equal(intersect([a, a]).ks, a.ks)


def test_intersection_of_two_periods():
    f = sig(lambda t: np.sin(2 * np.pi * t))
    g = sig(lambda t: np.sin(np.pi * t))
    a = scan_periods(f, EUCLIDEAN, 1, 8.0, 0.05, 0.02, 16.0)
    b = scan_periods(g, EUCLIDEAN, 1, 8.0, 0.05, 0.02, 16.0)
    both = intersect([a, b])
    assert np.allclose(both.taus, np.arange(-16, 17, 2))


def test_intersect_grid_mismatch(sine):
    a = scan_periods(sine, EUCLIDEAN, 1, 8.0, 0.05, 0.02, 16.0)
    b = scan_periods(sine, EUCLIDEAN, 1, 8.0, 0.05, 0.04, 16.0)
    with pytest.raises(InputError):
        intersect([a, b])
    with pytest.raises(InputError):
        containment_check(a, b)


def test_containment(qp):
    s = scan_values(qp, EUCLIDEAN, 1, 32.0, 0.05, 32.0)
    inner, outer = s.periods(0.3), s.periods(0.6)
    same = containment_check(inner, inner)
    assert same.contained and same.margin < 0.3
    assert containment_check(outer, inner).contained
    rev = containment_check(inner, outer)
    assert not rev.contained and rev.violating_taus


@given(st.floats(0.05, 1.5), st.floats(0.0, 1.0))
def test_monotone_in_epsilon(e1, bump):
    f = sig(lambda t: np.sin(2 * np.pi * t) + 0.5 * np.sin(2 * SQRT2 * np.pi * t), h=0.1,
            length=64.0)
    s = scan_values(f, EUCLIDEAN, 1, 4.0, 0.1, 16.0)
    assert set(s.periods(e1).ks) <= set(s.periods(e1 + bump).ks)
    assert 0 in set(s.periods(e1).ks)


def test_symmetry_and_near_group(qp):
    s = scan_values(qp, EUCLIDEAN, 1, 32.0, 0.05, 32.0)
    aps = s.periods(0.3)
    ks = set(aps.ks.tolist())
    assert all(-k in ks for k in ks)
    slack = 2 * path_lipschitz(qp, EUCLIDEAN) * 0.05
    assert near_group_violations(aps, slack) == []


def test_parallel_scan_matches_serial(qp):
    a = scan_values(qp, EUCLIDEAN, 2, 8.0, 0.5, 16.0, jobs=1)
    b = scan_values(qp, EUCLIDEAN, 2, 8.0, 0.5, 16.0, jobs=4)
    assert np.array_equal(a.values, b.values, equal_nan=True)


def test_scan_errors(sine):
    with pytest.raises(InputError):
        scan_values(sine, EUCLIDEAN, 1, 8.0, 0.03, 16.0)
    with pytest.raises(InputError):
        scan_values(sine, EUCLIDEAN, 1, 8.0, 0.02, 40.0)
    with pytest.raises(InputError):
        scan_values(sine, EUCLIDEAN, 1, 8.0, 0.02, 16.0).periods(0.0)
