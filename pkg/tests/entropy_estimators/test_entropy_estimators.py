"""
Tests for spanning counts, the periodic bound searches and the entropy report.
"""

import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from src.entropy_estimators import (
    entropy_slope,
    formula_report,
    greedy_cover,
    k_grid,
    lower_bound_search,
    periodic_rate,
    spanning_count,
    spanning_table,
    uniqueness_diagnostic,
    upper_bound_search,
    write_spanning_csv,
)
from src.flow_engine import periodic_orbit
from src.shared.errors import AdmissibilityError, ConfigError
from src.shared.schemas.estimators import EntropyConfig, SearchConfig, SpanningConfig
from src.system_model import ControlSignal, Region, shift
from config.settings import settings


@pytest.fixture
def search_config():
    return SearchConfig(horizon=20.0, restarts=2, seeds_per_control=2, descent_sweeps=0, seed=1)


def counts(*pairs):
    return [SimpleNamespace(tau=tau, count=count) for tau, count in pairs]


def test_entropy_slope_of_synthetic_counts():
    assert entropy_slope(counts((1, 1), (2, 1), (3, 1), (4, 1))) == pytest.approx(0.0)
    synthetic = counts(*[(tau, math.exp(0.7 * tau)) for tau in (1, 2, 3, 4, 5)])
    assert entropy_slope(synthetic) == pytest.approx(0.7)
    with pytest.raises(ConfigError):
        entropy_slope(counts((1, 2), (2, 4)))


def test_greedy_cover_prefers_large_sets_and_low_indices():
    coverage = np.array([
        [True, True, False, False],
        [False, True, True, True],
        [True, False, False, False],
        [False, True, True, True],
    ])
    selected, witness = greedy_cover(coverage)
    assert selected == [1, 0]
    assert witness.tolist() == [0, 1, 1, 1]


def test_spanning_count_rejects_bad_input(scalar_spec):
    q_region = scalar_spec.region("Q")
    with pytest.raises(ConfigError):
        spanning_count(scalar_spec, [[0.0]], q_region, 0.0)
    with pytest.raises(AdmissibilityError):
        spanning_count(scalar_spec, [[0.0], [1.5]], q_region, 1.0)


def test_scalar_spanning_counts_grow_like_the_exponential(scalar_spec):
    q_region = scalar_spec.region("Q")
    points = k_grid(scalar_spec, q_region, "K", points_per_axis=401)
    results = [spanning_count(scalar_spec, points, q_region, tau) for tau in (1.0, 2.0, 3.0, 4.0, 5.0)]
    observed = [r.count for r in results]
    assert observed == sorted(observed)
    # one control keeps an interval of width at most |Q| e^{-tau}
    spacing = 1.8 / 400
    for r in results:
        per_control = math.floor(1.98 * math.exp(-r.tau) / spacing + 1e-6) + 1
        assert r.count >= math.ceil(401 / per_control)
        assert r.verification_failures == []
    report = spanning_table(results)
    assert 0.6 <= report.slope <= 1.4
    assert [row.tau for row in report.rows] == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_spanning_csv(tmp_path, scalar_spec):
    q_region = scalar_spec.region("Q")
    points = k_grid(scalar_spec, q_region, points_per_axis=11)
    results = [spanning_count(scalar_spec, points, q_region, tau, config=SpanningConfig(reverify=False))
               for tau in (0.5, 1.0)]
    path = write_spanning_csv(spanning_table(results), tmp_path / "spanning.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "tau,count,rate,candidates,verification_failures"
    assert len(lines) == 3


def test_single_point_needs_one_control(scalar_spec):
    result = spanning_count(scalar_spec, [[0.3]], scalar_spec.region("Q"), 2.0)
    assert result.count == 1


def test_spanning_count_does_not_grow_with_q(scalar_spec):
    points = np.linspace(-0.1, 0.1, 5)[:, None]
    config = SpanningConfig(levels=5)
    narrow = spanning_count(scalar_spec, points, Region((-0.25,), (0.25,), 0.05), 1.0, config=config)
    wide = spanning_count(scalar_spec, points, scalar_spec.region("Q"), 1.0, config=config)
    assert wide.count == 1
    assert narrow.count >= 2
    assert wide.count <= narrow.count


def test_spanning_counts_are_submultiplicative(scalar_spec, contraction_spec):
    points = k_grid(scalar_spec, scalar_spec.region("Q"), "K", points_per_axis=41)
    one, two = (spanning_count(scalar_spec, points, scalar_spec.region("Q"), tau).count for tau in (1.0, 2.0))
    assert two <= one * one

    q_region = contraction_spec.region("Q")
    points = k_grid(contraction_spec, q_region, points_per_axis=11)
    counts = {tau: spanning_count(contraction_spec, points, q_region, tau).count for tau in (1.0, 2.0)}
    assert counts[2.0] <= counts[1.0] ** 2


def test_k_grid_defaults_to_shrunken_q(scalar_spec):
    q_region = scalar_spec.region("Q")
    points = k_grid(scalar_spec, q_region, points_per_axis=5, k_shrink=0.5)
    np.testing.assert_allclose(points[:, 0], np.linspace(-0.495, 0.495, 5))
    assert k_grid(scalar_spec, q_region, "K", points_per_axis=3)[:, 0].tolist() == [-0.9, 0.0, 0.9]


def test_periodic_rate_of_the_scalar_orbit(scalar_spec):
    u = ControlSignal.from_array([[0.5], [-0.5]], scalar_spec.delta, periodic=True)
    orbit = periodic_orbit(scalar_spec, u, [0.0])
    assert periodic_rate(orbit, 10.0) == pytest.approx(1.0, abs=1e-6)
    assert periodic_rate(orbit, 10.0, "unstable", np.array([[1.0]])) == pytest.approx(1.0, abs=1e-6)
    assert periodic_rate(orbit, 10.0, "unstable", np.zeros((1, 0))) == 0.0
    with pytest.raises(ValueError):
        periodic_rate(orbit, 10.0, "volume")


def test_upper_rate_is_invariant_under_a_cyclic_shift(bistable_spec):
    u = ControlSignal.from_array([[0.1], [0.1], [-0.1], [-0.1]], bistable_spec.delta, periodic=True)
    rotated = shift(u, bistable_spec.delta)
    first = periodic_orbit(bistable_spec, u, [0.0])
    second = periodic_orbit(bistable_spec, rotated, [0.0])
    assert abs(first.x0[0]) < 0.1 and abs(second.x0[0]) < 0.1
    assert periodic_rate(second, 8.0) == pytest.approx(periodic_rate(first, 8.0), abs=1e-6)
    assert periodic_rate(first, 8.0) > 0.5


@pytest.mark.parametrize("fixture,expected,rel", [("scalar_spec", 1.0, 5e-3), ("diag_spec", 1.5, 0.02)])
def test_bounds_on_hyperbolic_testbeds(fixture, expected, rel, request, search_config):
    spec = request.getfixturevalue(fixture)
    q_region = spec.region("Q")
    upper = upper_bound_search(spec, q_region, search_config)
    lower = lower_bound_search(spec, q_region, search_config)
    assert upper.value == pytest.approx(expected, rel=rel)
    assert lower.value == pytest.approx(expected, rel=rel)
    assert lower.value <= upper.value + 1e-3
    assert lower.verification is not None and lower.verification.passed
    assert np.all(q_region.contains(upper.witness.orbit.segment.states, tol=1e-9))
    assert upper.witness.agreement < 1e-3


def test_contraction_has_zero_entropy(contraction_spec, search_config):
    q_region = contraction_spec.region("Q")
    assert upper_bound_search(contraction_spec, q_region, search_config).value == pytest.approx(0.0, abs=1e-12)
    assert lower_bound_search(contraction_spec, q_region, search_config).value == pytest.approx(0.0, abs=1e-12)


def test_lower_bound_with_no_unstable_directions(diag_spec):
    config = SearchConfig(dims=(2, 0))
    result = lower_bound_search(diag_spec, diag_spec.region("Q"), config)
    assert result.value == 0.0 and result.witness is None


def test_uniqueness_of_the_scalar_periodic_point(scalar_spec):
    u = ControlSignal.from_array([[0.5], [-0.5]], scalar_spec.delta, periodic=True)
    report = uniqueness_diagnostic(scalar_spec, u, scalar_spec.region("Q"), seeds=4)
    assert report.unique
    assert report.distinct_orbits == 1
    assert report.seeds == 4


def test_bistable_control_has_several_confined_orbits(bistable_spec):
    u = ControlSignal.constant([0.0], bistable_spec.delta)
    report = uniqueness_diagnostic(bistable_spec, u, bistable_spec.region("D"), seeds=16, seed=2)
    assert not report.unique
    assert report.distinct_orbits >= 2


def test_scalar_report_satisfies_the_sandwich(scalar_spec, search_config):
    config = EntropyConfig(
        taus=[1.0, 2.0, 3.0, 4.0, 5.0],
        points_per_axis=401,
        k_region="K",
        search=search_config,
    )
    report = formula_report(scalar_spec, scalar_spec.region("Q"), config)
    assert report.upper_bound == pytest.approx(1.0, abs=5e-3)
    assert report.lower_bound == pytest.approx(1.0, abs=5e-3)
    assert report.sandwich_ok
    assert report.spanning_consistent
    assert report.spanning_slope <= report.upper_bound + 0.2
    assert report.uniqueness.unique
    assert report.upper_witness.period > 0


def test_report_without_the_spanning_route(contraction_spec, search_config):
    config = EntropyConfig(spanning_route=False, search=search_config)
    report = formula_report(contraction_spec, contraction_spec.region("Q"), config)
    assert report.spanning is None and report.spanning_slope is None
    assert report.upper_bound == pytest.approx(0.0, abs=1e-12)
    assert report.sandwich_ok


def test_diagonal_report_orders_the_three_routes(diag_spec, search_config):
    config = EntropyConfig(taus=[1.0, 2.0, 3.0], points_per_axis=11, search=search_config)
    report = formula_report(diag_spec, diag_spec.region("Q"), config)
    assert report.upper_bound == pytest.approx(1.5, rel=0.02)
    assert report.lower_bound == pytest.approx(1.5, rel=0.02)
    assert report.sandwich_ok
    assert report.spanning_consistent
    assert report.lower_consistent == (report.lower_bound <= report.spanning_slope + settings.SPANNING_SLACK)
    exported = json.loads(report.model_dump_json())
    assert exported["lower_consistent"] == report.lower_consistent


def test_lower_consistency_needs_both_routes(contraction_spec, search_config):
    config = EntropyConfig(spanning_route=False, search=search_config)
    assert formula_report(contraction_spec, contraction_spec.region("Q"), config).lower_consistent is None
