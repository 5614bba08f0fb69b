"""
Tests for splitting estimation and dichotomy verification.
"""

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from src.hyperbolic_splitting import (
    check_gap,
    continuity_diagnostic,
    detect_dimensions,
    estimate_splitting,
    periodic_splitting,
    verify_hyperbolicity,
)
from src.shared.errors import ClosureError, DimensionMismatchError, HyperbolicityError
from src.system_model import ControlSignal, build_system

E1 = np.array([[1.0], [0.0]])
E2 = np.array([[0.0], [1.0]])


@pytest.fixture
def zero_control(diag_spec):
    return ControlSignal.constant([0.0, 0.0], diag_spec.delta)


def test_detect_dimensions_counts_positive_exponents():
    assert detect_dimensions(np.array([1.5, -0.7])) == (1, 1)
    assert detect_dimensions(np.array([-0.2, -0.1, 0.3])) == (2, 1)
    with pytest.raises(DimensionMismatchError):
        detect_dimensions(np.array([0.001, -0.5]))
    assert detect_dimensions(np.array([0.001, -0.5]), require_gap=False) == (1, 1)


def test_check_gap():
    assert check_gap(np.array([1.5, -0.7]), (1, 1)) == pytest.approx(2.2)
    assert check_gap(np.array([1.5, 0.7]), (0, 2)) == float("inf")
    with pytest.raises(DimensionMismatchError):
        check_gap(np.array([0.3, 0.299]), (1, 1))


def test_diagonal_splitting_is_the_coordinate_axes(diag_spec, zero_control):
    splitting = estimate_splitting(diag_spec, zero_control, [0.0, 0.0], tau=1.0, horizon=20.0)
    assert splitting.dims == (1, 1)
    assert len(splitting.times) == 11
    for k in range(len(splitting.times)):
        assert np.max(subspace_angles(splitting.plus_basis(k), E1)) < 1e-6
        assert np.max(subspace_angles(splitting.minus_basis(k), E2)) < 1e-6
    assert splitting.angle_floor == pytest.approx(np.pi / 2, abs=1e-6)
    assert splitting.invariance_defect < 1e-6
    np.testing.assert_allclose(np.sort(splitting.exponents)[::-1], [1.5, -0.7], atol=1e-6)


def test_sheared_saddle_has_a_tilted_stable_direction():
    # x' = A x + u with A = [[1, 1], [0, -1]]
    spec = build_system(2, [["x1 + x2", "-x2"], ["1", "0"], ["0", "1"]], [-1, -1], [1, 1], delta=0.1)
    u = ControlSignal.constant([0.0, 0.0], spec.delta)
    splitting = estimate_splitting(spec, u, [0.0, 0.0], tau=1.0, horizon=20.0)
    assert splitting.dims == (1, 1)
    stable = np.array([[1.0], [-2.0]]) / np.sqrt(5.0)
    for k in range(len(splitting.times)):
        assert np.max(subspace_angles(splitting.plus_basis(k), E1)) < 1e-6
        assert np.max(subspace_angles(splitting.minus_basis(k), stable)) < 1e-6
    assert splitting.angle_floor == pytest.approx(np.arccos(1.0 / np.sqrt(5.0)), abs=1e-6)


def test_splitting_off_the_equilibrium_uses_a_window(diag_spec, zero_control):
    splitting = estimate_splitting(diag_spec, zero_control, [1e-9, 0.01], horizon=20.0)
    assert splitting.method == "iteration"
    assert np.max(subspace_angles(splitting.plus_basis(0), E1)) < 1e-6
    assert np.max(subspace_angles(splitting.minus_basis(0), E2)) < 1e-6


def test_requested_dimensions_must_add_up(diag_spec, zero_control):
    with pytest.raises(DimensionMismatchError):
        estimate_splitting(diag_spec, zero_control, [0.0, 0.0], dims=(1, 2))


def test_periodic_splitting_reads_the_monodromy(diag_spec):
    u = ControlSignal.constant([0.3, -0.14], diag_spec.delta)
    splitting = periodic_splitting(diag_spec, u, [-0.2, -0.2], tau=0.5)
    assert splitting.method == "floquet"
    assert splitting.dims == (1, 1)
    assert np.max(subspace_angles(splitting.plus_basis(-1), E1)) < 1e-8
    assert np.max(subspace_angles(splitting.minus_basis(-1), E2)) < 1e-8
    with pytest.raises(ClosureError):
        periodic_splitting(diag_spec, u, [0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        periodic_splitting(diag_spec, u, [-0.2, -0.2], dims=(2, 0))


def test_verification_passes_on_the_diagonal_system(diag_spec, zero_control):
    splitting = estimate_splitting(diag_spec, zero_control, [0.0, 0.0])
    report = verify_hyperbolicity(diag_spec, splitting, probe_horizon=5.0)
    assert report.passed
    assert report.lambda_hat == pytest.approx(0.7, rel=1e-4)
    assert report.expansion_rate == pytest.approx(1.5, rel=1e-4)
    assert report.contraction_rate == pytest.approx(0.7, rel=1e-4)
    assert report.violations == []


def test_verification_failure_can_raise(diag_spec, zero_control):
    splitting = estimate_splitting(diag_spec, zero_control, [0.0, 0.0])
    report = verify_hyperbolicity(diag_spec, splitting, min_rate=1.0)
    assert not report.passed
    assert report.violations
    with pytest.raises(HyperbolicityError):
        verify_hyperbolicity(diag_spec, splitting, min_rate=1.0, raise_on_failure=True)


def test_continuity_of_a_linear_splitting(diag_spec, zero_control):
    result = continuity_diagnostic(diag_spec, zero_control, [0.0, 0.0], perturbation=1e-12)
    assert result["unstable_distance"] < 1e-6
    assert result["stable_distance"] < 1e-6


def test_splitting_csv(tmp_path, diag_spec, zero_control):
    splitting = estimate_splitting(diag_spec, zero_control, [0.0, 0.0], tau=0.2)
    lines = splitting.to_csv(tmp_path / "splitting.csv").read_text().splitlines()
    assert lines[0] == "t,subspace,column,e1,e2"
    assert len(lines) == 1 + 3 * 2
