"""
Tests for the product metric, delta-chains, shadows and Morse spectra.
"""

import numpy as np
import pytest

from src.expr_core import parse
from src.shared.errors import ConfigError
from src.shared.schemas.estimators import MorseConfig
from src.shared.schemas.reports import SpectrumReport
from src.shift_shadowing import (
    ChainOfWindows,
    ConstantCocycle,
    CoordinateCocycle,
    FunctionCocycle,
    SeqWindow,
    chain_exponent,
    metric_ball_check,
    min_lyapunov_via_periodic,
    morse_spectrum,
    periodic_average,
    product_metric,
    read_chain_csv,
    sequence_from_control,
    shadow,
    shadow_bound,
    shadow_deviations,
    shadow_experiment,
    write_chain_csv,
    witness_exponent,
    write_shadow_csv,
)
from src.system_model import ControlSignal

ALPHABET = np.linspace(-1.0, 1.0, 5)


def test_product_metric_weights_entries_by_distance():
    xi = SeqWindow(np.zeros(7))
    eta = SeqWindow(np.array([0.9, 0.0, 0.0, 0.05, 0.0, 0.0, 0.0]))
    value, slack = product_metric(xi, eta)
    assert value == pytest.approx(1.0 / 3.0)
    assert slack == pytest.approx(0.25)
    with pytest.raises(ConfigError):
        product_metric(xi, SeqWindow(np.zeros(5)))


def test_metric_ball_equivalence_on_random_pairs():
    rng = np.random.default_rng(17)
    violations = 0
    outcomes = set()
    for _ in range(10_000):
        radius = int(rng.integers(4, 40))
        eps = rng.uniform(1.0 / (radius + 1), 1.0)
        xi = SeqWindow(rng.uniform(-1, 1, size=(2 * radius + 1, 2)))
        eta = SeqWindow(xi.entries + rng.uniform(-1, 1, size=xi.entries.shape) * rng.uniform(0, 2 * eps))
        left, right = metric_ball_check(xi, eta, eps)
        outcomes.add(left)
        violations += left != right
    assert violations == 0
    assert outcomes == {True, False}


def test_metric_ball_check_needs_a_wide_window():
    xi = SeqWindow(np.zeros(5))
    with pytest.raises(ConfigError):
        metric_ball_check(xi, xi, 0.1)


def test_window_shift_and_truncate():
    window = SeqWindow(np.arange(7.0))
    assert window.radius == 3
    assert window.at(0)[0] == 3.0
    assert window.shifted().entries[:, 0].tolist() == [2.0, 3.0, 4.0, 5.0, 6.0]
    assert window.truncate(1).entries[:, 0].tolist() == [2.0, 3.0, 4.0]
    with pytest.raises(ConfigError):
        window.truncate(4)
    with pytest.raises(ConfigError):
        SeqWindow(np.zeros(4))


def test_sequence_from_control_stacks_unit_intervals():
    u = ControlSignal.from_array([[0.1], [0.2]], 0.5, periodic=True)
    window = sequence_from_control(u, radius=2)
    assert window.entries.shape == (5, 2)
    np.testing.assert_allclose(window.at(1), [0.1, 0.2])
    with pytest.raises(ConfigError):
        sequence_from_control(ControlSignal.constant([0.0], 0.3), radius=1)


def test_chain_rejects_large_jumps():
    first = SeqWindow(np.array([0.0, 0.0, 0.0]))
    second = SeqWindow(np.array([0.0, 0.5, 0.0]))
    with pytest.raises(ConfigError):
        ChainOfWindows((first, second), delta=0.01)
    with pytest.raises(ConfigError):
        ChainOfWindows((first, first, SeqWindow(np.array([0.0, 0.0, 0.001]))), delta=0.01, periodic=True)


def test_shadow_of_the_fixture_chain(fixtures_dir, tmp_path):
    chain = read_chain_csv(fixtures_dir / "chains" / "perturbed_word.csv", delta=0.01)
    assert chain.length == 3 and chain.radius == 2
    orbit = shadow(chain)
    np.testing.assert_allclose(orbit.entries[:, 0], [0.5, -0.5, 0.0, 0.503, -0.498, 0.0, 0.5, -0.5])
    deviations = shadow_deviations(chain, orbit)
    assert np.max(deviations) <= shadow_bound(0.01, 2)
    lines = write_shadow_csv(chain, orbit, tmp_path / "shadow.csv").read_text().splitlines()
    assert lines[0] == "step,deviation,bound,eta_1"
    assert len(lines) == 5


def test_chain_csv_round_trip(fixtures_dir, tmp_path):
    chain = read_chain_csv(fixtures_dir / "chains" / "perturbed_word.csv", delta=0.01)
    copy = read_chain_csv(write_chain_csv(chain, tmp_path / "chain.csv"), delta=0.01)
    np.testing.assert_array_equal(copy.stacked(), chain.stacked())
    with pytest.raises(ConfigError):
        read_chain_csv(tmp_path / "missing.csv", delta=0.01)


@pytest.mark.parametrize("delta", [1e-2, 1e-4, 1e-6])
def test_random_chains_are_shadowed_within_the_bound(delta):
    summary = shadow_experiment([-1.0], [1.0], delta, chains=1000, length=30, radius=64, seed=5)
    assert summary.violations == 0
    assert summary.max_deviation <= summary.bound
    assert summary.bound == pytest.approx(delta ** 0.5 + 1.0 / 65.0)


def test_periodic_chains_have_periodic_shadows():
    summary = shadow_experiment([-1.0, -1.0], [1.0, 1.0], 1e-4, chains=200, length=7, radius=16,
                                periodic=True, seed=9)
    assert summary.violations == 0


def test_experiment_does_not_depend_on_workers():
    serial = shadow_experiment([-1.0], [1.0], 1e-3, chains=40, length=10, radius=8, seed=2, workers=1)
    parallel = shadow_experiment([-1.0], [1.0], 1e-3, chains=40, length=10, radius=8, seed=2, workers=4)
    assert serial.max_deviation == parallel.max_deviation


def test_periodic_averages():
    word = np.array([[1.0], [-0.5], [0.0]])
    assert periodic_average(CoordinateCocycle(), word) == pytest.approx(1.0 / 6.0)
    assert periodic_average(CoordinateCocycle(index=1), word) == pytest.approx(1.0 / 6.0)
    assert min_lyapunov_via_periodic(CoordinateCocycle(), ALPHABET, period_max=2) == pytest.approx(-1.0)
    square = FunctionCocycle.from_expression(parse("x1^2", 1))
    assert min_lyapunov_via_periodic(square, ALPHABET, period_max=2) == pytest.approx(0.0)


def test_morse_spectrum_of_the_coordinate_cocycle():
    config = MorseConfig(eps=[0.2, 0.1, 0.05, 0.025, 0.0125], chains=100, seed=4)
    report = morse_spectrum(CoordinateCocycle(), ALPHABET, config)
    assert report.lower == pytest.approx(-1.0, abs=0.05)
    assert report.upper == pytest.approx(1.0, abs=0.05)
    assert [level.eps for level in report.levels] == [0.2, 0.1, 0.05, 0.025, 0.0125]
    for coarse, fine in zip(report.levels, report.levels[1:]):
        assert coarse.lower <= fine.lower and fine.upper <= coarse.upper
    assert report.periodic_minimum == pytest.approx(-1.0)


def test_morse_spectrum_of_a_constant_cocycle_is_a_point():
    report = morse_spectrum(ConstantCocycle(0.3), ALPHABET, MorseConfig(chains=20))
    assert report.lower == pytest.approx(0.3) and report.upper == pytest.approx(0.3)


@pytest.mark.parametrize("cocycle", [
    CoordinateCocycle(),
    FunctionCocycle(lambda centre: np.abs(centre[:, 0, 0] - centre[:, 2, 0]), radius=1),
])
def test_morse_witnesses_reproduce_the_level_bounds(cocycle):
    config = MorseConfig(eps=[0.2, 0.1], chains=30, period_max=1, seed=3)
    report = SpectrumReport.model_validate_json(morse_spectrum(cocycle, ALPHABET, config).model_dump_json())
    for level in report.levels:
        assert witness_exponent(cocycle, level.lower_witness) == pytest.approx(level.lower, abs=1e-12)
        assert witness_exponent(cocycle, level.upper_witness) == pytest.approx(level.upper, abs=1e-12)
        assert level.lower_witness.value == level.lower and level.upper_witness.value == level.upper


def test_switching_chains_carry_the_upper_witness():
    jumps = FunctionCocycle(lambda centre: np.abs(centre[:, 0, 0] - centre[:, 2, 0]), radius=1)
    config = MorseConfig(eps=[0.2], chains=30, period_max=1, seed=3)
    level = morse_spectrum(jumps, ALPHABET, config).levels[0]
    assert level.lower == 0.0 and level.lower_witness.pads is None
    assert level.upper > 0.0
    assert level.upper_witness.pads is not None and level.upper_witness.eps == 0.2
    assert len(level.upper_witness.pads) == len(level.upper_witness.word)


def test_chain_exponent_needs_a_step():
    chain = ChainOfWindows((SeqWindow(np.zeros(3)),), delta=0.1)
    with pytest.raises(ValueError):
        chain_exponent(ConstantCocycle(1.0), chain)
