"""
Tests for RK4 integration, transition maps and periodic orbits.
"""

import math

import numpy as np
import pytest

from src.flow_engine import (
    StepMapSource,
    bowen_distance,
    closed_segment,
    closure_defect,
    integrate,
    integrate_backward,
    integrate_batch,
    merge_conditioned,
    monodromy,
    periodic_orbit,
    periodic_source,
    source_from_segment,
    step_count,
)
from src.shared.errors import BlowUpError, ClosureError, GridAlignmentError, NonConvergenceError
from src.system_model import ControlSignal


def exact_scalar(x0: float, c: float, t: float) -> float:
    return math.exp(t) * x0 + (math.exp(t) - 1.0) * c


def test_scalar_solution_and_fundamental(scalar_spec):
    u = ControlSignal.constant([0.25], scalar_spec.delta)
    segment = integrate(scalar_spec, [0.5], u, 1.0)
    assert segment.n_steps == 100
    assert segment.final_state[0] == pytest.approx(exact_scalar(0.5, 0.25, 1.0), rel=1e-8)
    assert segment.fundamental()[0, 0] == pytest.approx(math.e, rel=1e-8)
    np.testing.assert_allclose(segment.transition(0, 100), segment.fundamental())


def test_step_halving_shows_fourth_order(scalar_spec):
    u = ControlSignal.constant([0.3], scalar_spec.delta)
    exact = exact_scalar(0.2, 0.3, 1.0)
    coarse = abs(integrate(scalar_spec, [0.2], u, 1.0, h=0.02).final_state[0] - exact)
    fine = abs(integrate(scalar_spec, [0.2], u, 1.0, h=0.01).final_state[0] - exact)
    assert math.log2(coarse / fine) >= 3.5


def test_switching_control_matches_the_piecewise_solution(scalar_spec):
    u = ControlSignal.from_array([[1.0], [-1.0]], scalar_spec.delta, periodic=True)
    segment = integrate(scalar_spec, [0.1], u, 0.2)
    mid = exact_scalar(0.1, 1.0, 0.1)
    assert segment.final_state[0] == pytest.approx(exact_scalar(mid, -1.0, 0.1), rel=1e-9)


def test_backward_integration_returns_to_the_start(scalar_spec):
    u = ControlSignal.constant([-0.4], scalar_spec.delta)
    forward = integrate(scalar_spec, [0.3], u, 1.0)
    backward = integrate_backward(scalar_spec, forward.final_state, u, 1.0)
    assert backward.times[0] == pytest.approx(-1.0)
    assert backward.x0[0] == pytest.approx(0.3, abs=1e-9)
    assert backward.fundamental()[0, 0] == pytest.approx(math.e, rel=1e-8)


def test_duration_must_align_with_the_step(scalar_spec):
    with pytest.raises(GridAlignmentError):
        step_count(0.015, scalar_spec.h_int)


def test_blow_up_is_reported(blowup_spec):
    spec = blowup_spec
    with pytest.raises(BlowUpError) as exc:
        integrate(spec, [2.0], ControlSignal.constant([0.0], spec.delta), 5.0)
    assert 0.4 < exc.value.time < 0.6


def test_batch_flags_blown_rows_without_raising(blowup_spec):
    spec = blowup_spec
    result = integrate_batch(spec, np.array([[0.1], [2.0]]), np.array([0.0]), 1.0)
    assert result.blown.tolist() == [False, True]
    assert result.alive.tolist() == [True, False]


def test_batch_monitor_stops_rows(scalar_spec):
    inside = lambda step, t, X, rows: np.abs(X[:, 0]) <= 0.99
    result = integrate_batch(scalar_spec, np.array([[0.0], [0.9]]), np.array([0.0]), 1.0, monitor=inside)
    assert result.alive.tolist() == [True, False]
    assert result.final[1, 0] > 0.99


def test_schedule_controls_per_row(scalar_spec):
    schedule = np.zeros((10, 2, 1))
    schedule[:, 1, 0] = 1.0
    result = integrate_batch(scalar_spec, np.zeros((2, 1)), schedule, 1.0)
    assert result.final[0, 0] == pytest.approx(0.0)
    assert result.final[1, 0] == pytest.approx(math.e - 1.0, rel=1e-8)


def test_bowen_distance_grows_with_the_expansion(scalar_spec):
    u = ControlSignal.constant([0.0], scalar_spec.delta)
    assert bowen_distance(scalar_spec, u, [0.0], [1e-3], 1.0) == pytest.approx(1e-3 * math.e, rel=1e-7)


def test_newton_shooting_finds_the_periodic_orbit(scalar_spec):
    u = ControlSignal.from_array([[0.5], [-0.5]], scalar_spec.delta, periodic=True)
    orbit = periodic_orbit(scalar_spec, u, [0.3])
    assert orbit.residual < 1e-11
    assert orbit.period == pytest.approx(0.2)
    assert orbit.monodromy[0, 0] == pytest.approx(math.exp(0.2), rel=1e-8)
    np.testing.assert_allclose(monodromy(scalar_spec, orbit.x0, u), orbit.monodromy)


def test_monodromy_needs_a_closed_orbit(scalar_spec):
    u = ControlSignal.from_array([[0.5], [-0.5]], scalar_spec.delta, periodic=True)
    with pytest.raises(ClosureError):
        monodromy(scalar_spec, [0.3], u)


def test_closed_segment_reports_its_defect(scalar_spec):
    u = ControlSignal.from_array([[0.5], [-0.5]], scalar_spec.delta, periodic=True)
    orbit = periodic_orbit(scalar_spec, u, [0.3])
    segment = closed_segment(scalar_spec, orbit.x0, u)
    assert closure_defect(segment) <= 1e-8
    assert segment.duration == pytest.approx(orbit.period)
    with pytest.raises(ClosureError) as excinfo:
        closed_segment(scalar_spec, [0.3], u)
    assert excinfo.value.defect > 1e-8


def test_shooting_fails_with_multiplier_one(double_integrator_spec):
    u = ControlSignal.from_array([[0.5], [-0.5]], double_integrator_spec.delta, periodic=True)
    with pytest.raises(NonConvergenceError):
        periodic_orbit(double_integrator_spec, u, [0.0, 0.0])


def test_step_map_sources(scalar_spec):
    u = ControlSignal.from_array([[0.5], [-0.5]], scalar_spec.delta, periodic=True)
    segment = integrate(scalar_spec, [0.1], u, 1.0)
    source = source_from_segment(segment)
    assert source.bounds == (0, 100)
    np.testing.assert_allclose(source.product(10, 60), segment.transition(10, 60))
    tiled = periodic_source(integrate(scalar_spec, [0.1], u, 0.2))
    assert tiled.product(-20, 20)[0, 0] == pytest.approx(math.exp(0.4), rel=1e-8)
    assert len(source.chunks(0, 100, 30)) == 4


def test_merge_conditioned_keeps_products_well_conditioned():
    chunks = [np.diag([10.0, 0.1])] * 4
    assert len(merge_conditioned(chunks, 1e3)) == 4
    merged = merge_conditioned(chunks, 1e5)
    assert len(merged) == 2
    total = np.eye(2)
    for m in merged:
        total = m @ total
    np.testing.assert_allclose(total, np.diag([1e4, 1e-4]))
    source = StepMapSource(maps=np.array(chunks), h=0.1)
    np.testing.assert_allclose(source.product(0, 4), total)
