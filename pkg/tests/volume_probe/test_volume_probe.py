"""
Tests for Bowen-ball volumes and the volume boundedness check.
"""

import math

import numpy as np
import pytest

from src.hyperbolic_splitting import estimate_splitting
from src.shared.errors import ConfigError
from src.shared.schemas.estimators import VolumeConfig
from src.system_model import ControlSignal
from src.volume_probe import ball_volume, bowen_ball_volume, volume_lemma_check, write_volume_csv


def test_ball_volume():
    assert ball_volume(1, 0.1) == pytest.approx(0.2)
    assert ball_volume(2, 1.0) == pytest.approx(math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(4.0 / 3.0 * math.pi * 8.0)


def test_contracting_bowen_ball_is_the_eps_ball(contraction_spec):
    u = ControlSignal.constant([0.0], contraction_spec.delta)
    estimate = bowen_ball_volume(contraction_spec, u, [0.0], 0.1, 2.0, samples=20000, proposal="ball")
    assert estimate.hits == 20000
    assert estimate.volume == pytest.approx(0.2)
    assert estimate.stderr == 0.0


def test_expanding_bowen_ball_shrinks_exponentially(scalar_spec):
    u = ControlSignal.constant([0.0], scalar_spec.delta)
    estimate = bowen_ball_volume(scalar_spec, u, [0.0], 0.1, 2.0, samples=100000, seed=3)
    assert estimate.proposal == "box"
    assert estimate.volume == pytest.approx(0.2 * math.exp(-2.0), rel=0.02)


def test_bowen_ball_volume_shrinks_with_the_horizon(scalar_spec):
    u = ControlSignal.constant([0.0], scalar_spec.delta)
    volumes = [bowen_ball_volume(scalar_spec, u, [0.0], 0.1, tau, samples=20000, seed=5).volume
               for tau in (0.5, 1.0, 2.0, 3.0)]
    assert volumes == sorted(volumes, reverse=True)
    assert volumes[-1] < volumes[0]


def test_estimates_are_reproducible(scalar_spec):
    u = ControlSignal.constant([0.0], scalar_spec.delta)
    first = bowen_ball_volume(scalar_spec, u, [0.0], 0.1, 1.0, samples=5000, seed=11, workers=1)
    second = bowen_ball_volume(scalar_spec, u, [0.0], 0.1, 1.0, samples=5000, seed=11, workers=3)
    assert first.hits == second.hits
    assert first.volume == second.volume
    with pytest.raises(ConfigError):
        bowen_ball_volume(scalar_spec, u, [0.0], 0.0, 1.0)


def test_default_ratio_threshold_is_ten():
    assert VolumeConfig().threshold == 10.0
    assert VolumeConfig(threshold=3.0).threshold == 3.0


def test_auto_proposal_samples_the_eps_ball_on_nonlinear_fields(bistable_spec, scalar_spec):
    assert scalar_spec.is_affine and not bistable_spec.is_affine
    u = ControlSignal.constant([0.0], bistable_spec.delta)
    auto = bowen_ball_volume(bistable_spec, u, [0.0], 0.1, 2.0, samples=20000, seed=9)
    ball = bowen_ball_volume(bistable_spec, u, [0.0], 0.1, 2.0, samples=20000, seed=9, proposal="ball")
    assert auto.proposal == "ball"
    assert auto.volume == ball.volume and auto.hits == ball.hits
    # the cubic term only slows the escape, so the linear volume is a floor
    assert 0.2 * math.exp(-2.0) <= auto.volume + 3 * auto.stderr


def test_volume_products_stay_bounded_on_the_diagonal_system(diag_spec):
    u = ControlSignal.constant([0.0, 0.0], diag_spec.delta)
    splitting = estimate_splitting(diag_spec, u, [0.0, 0.0])
    horizons = [float(t) for t in range(1, 11)]
    report = volume_lemma_check(diag_spec, splitting, u, [0.0, 0.0], 0.1, horizons,
                                VolumeConfig(seed=1, threshold=3.0))
    assert [row.tau for row in report.rows] == horizons
    assert report.inflated_ratio <= 3.0
    assert not report.flagged
    assert report.verification is not None and report.verification.passed
    for row in report.rows:
        assert row.j_plus == pytest.approx(math.exp(1.5 * row.tau), rel=1e-6)


def test_shear_without_a_splitting_is_flagged(jordan_spec):
    u = ControlSignal.constant([0.0], jordan_spec.delta)
    horizons = [float(t) for t in range(1, 11)]
    report = volume_lemma_check(jordan_spec, None, u, [0.0, 0.0], 0.1, horizons, VolumeConfig(samples=20000))
    assert report.flagged
    assert report.loglog_slope < -0.25
    assert report.verification is None
    assert all(row.j_plus == 1.0 for row in report.rows)


def test_splitting_provider_callable(diag_spec):
    u = ControlSignal.constant([0.0, 0.0], diag_spec.delta)
    calls = []

    def provider(spec, control, x):
        calls.append(x.tolist())
        return estimate_splitting(spec, control, x)

    report = volume_lemma_check(diag_spec, provider, u, [0.0, 0.0], 0.1, [1.0, 2.0], VolumeConfig(samples=5000))
    assert calls == [[0.0, 0.0]]
    assert len(report.rows) == 2
    with pytest.raises(ConfigError):
        volume_lemma_check(diag_spec, None, u, [0.0, 0.0], 0.1, [])


def test_volume_csv(tmp_path, contraction_spec):
    u = ControlSignal.constant([0.0], contraction_spec.delta)
    report = volume_lemma_check(contraction_spec, None, u, [0.0], 0.1, [1.0, 2.0, 3.0], VolumeConfig(samples=1000))
    lines = write_volume_csv(report, tmp_path / "volume.csv").read_text().splitlines()
    assert lines[0] == "tau,vol,stderr,J+,product,hits,samples,proposal"
    assert len(lines) == 4
    assert np.isfinite(report.ratio)
