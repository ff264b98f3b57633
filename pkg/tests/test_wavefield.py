"""Tests for scatter synthesis, uncertainty injection and dataset generation."""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.signal import hilbert
from scipy.stats import chisquare, truncnorm

from wavelocate.core.errors import (
    DimensionMismatch,
    InvalidParameter,
    NotConjugateSymmetric,
    PathTooShort,
    ZeroSignal,
    ZeroWavenumber,
)
from wavelocate.core.models import (
    DamagePolicy,
    DamagePolicyKind,
    DispersionTable,
    Excitation,
    ExcitationKind,
    FrequencyGrid,
    PlateMaterial,
    UncertaintySpec,
    quadrant_of,
)
from wavelocate.dispersion.analytic import analytic_dispersion
from wavelocate.dispersion.rayleigh_lamb import solve_rayleigh_lamb
from wavelocate.dispersion.velocity import group_velocity
from wavelocate.wavefield.generator import (
    DatasetGenerator,
    draw_damages,
    generate_dataset,
    mean_realized_snr,
)
from wavelocate.wavefield.synthesis import (
    multistatic_spectra,
    path_lengths,
    scatter_spectrum,
    silent_bins,
    to_frequency_domain,
    to_time_domain,
)
from wavelocate.wavefield.uncertainty import add_awgn, realized_snr_db, sample_alpha


def single_bin_table(kappa):
    """One-mode table on a 4-bin grid whose +1 bin carries the given wavenumber."""
    grid = FrequencyGrid(num_points=4, f_min=-2.0, f_max=2.0)
    return DispersionTable(grid, ("test",), np.array([[0.0, -kappa, 0.0, kappa]]))


class TestScatterSpectrum:
    """Tests for the point-scatterer spectrum."""

    def test_direct_substitution(self):
        """Test magnitude and phase at a single bin."""
        table = single_bin_table(100.0)
        spectrum = scatter_spectrum(table, ((0.0, 0.0), (1.0, 0.0)), (0.5, 0.0))
        assert abs(spectrum[3]) == pytest.approx(0.1)
        assert spectrum[3] == pytest.approx(0.1 * np.exp(-100j))

    def test_silent_bins_are_zero(self, small_table):
        """Test the DC and Nyquist bins."""
        spectrum = scatter_spectrum(small_table, ((0.1, 0.1), (0.9, 0.9)), (0.4, 0.6))
        silent = silent_bins(small_table.grid)
        assert silent.sum() == 2
        assert (spectrum[silent] == 0).all()

    def test_alpha_equals_scaled_table(self, small_table):
        """Test that distortion is a wavenumber scaling."""
        pair = ((0.1, 0.2), (0.8, 0.7))
        distorted = scatter_spectrum(small_table, pair, (0.5, 0.3), alpha=1.12)
        scaled = scatter_spectrum(small_table.scaled(1.12), pair, (0.5, 0.3))
        np.testing.assert_array_equal(distorted, scaled)

    def test_path_too_short(self, small_table):
        """Test a damage sitting on a colocated pair."""
        with pytest.raises(PathTooShort):
            scatter_spectrum(small_table, ((0.5, 0.5), (0.5, 0.5)), (0.5, 0.5))

    def test_zero_wavenumber_at_a_live_bin(self):
        """Test a table with kappa = 0 away from DC and Nyquist."""
        with pytest.raises(ZeroWavenumber):
            scatter_spectrum(single_bin_table(0.0), ((0.0, 0.0), (1.0, 0.0)), (0.5, 0.0))

    def test_path_lengths(self):
        """Test tx -> damage -> rx distances."""
        r = path_lengths(np.array([[0.0, 0.0]]), np.array([[0.0, 0.8]]), np.array([0.3, 0.4]))
        assert r[0] == pytest.approx(0.5 + math.hypot(0.3, 0.4))


class TestMultistaticSpectra:
    """Tests for superposed multistatic spectra."""

    def test_superposition_is_exact(self, small_table, corner_sensors):
        """Test that two damages add their individual spectra."""
        a, b = np.array([[0.3, 0.4]]), np.array([[0.7, 0.2]])
        both = multistatic_spectra(small_table, corner_sensors, np.vstack([a, b]))
        separate = multistatic_spectra(small_table, corner_sensors, a) + multistatic_spectra(
            small_table, corner_sensors, b
        )
        np.testing.assert_array_equal(both, separate)

    def test_rows_follow_pair_index(self, small_table, corner_sensors):
        """Test each row against the single-pair spectrum."""
        spectra = multistatic_spectra(small_table, corner_sensors, np.array([[0.4, 0.5]]))
        for row, (i, j) in enumerate(corner_sensors.pair_index):
            pair = (corner_sensors.positions[i], corner_sensors.positions[j])
            np.testing.assert_array_equal(
                spectra[row], scatter_spectrum(small_table, pair, (0.4, 0.5))
            )

    def test_excitation_weights_are_applied(self, small_table, corner_sensors):
        """Test spectral weighting."""
        weights = np.linspace(0.0, 1.0, small_table.grid.num_points)
        plain = multistatic_spectra(small_table, corner_sensors, np.array([[0.4, 0.5]]))
        weighted = multistatic_spectra(
            small_table, corner_sensors, np.array([[0.4, 0.5]]), weights=weights
        )
        np.testing.assert_allclose(weighted, plain * weights)


class TestTimeDomain:
    """Tests for DFT conversions."""

    def test_flat_spectrum_is_an_impulse(self):
        """Test the DFT identity."""
        grid = FrequencyGrid(num_points=16, f_min=-8.0, f_max=8.0)
        signal = to_time_domain(np.ones(16, dtype=complex), grid)
        expected = np.zeros(16)
        expected[0] = 1.0
        np.testing.assert_allclose(signal, expected, atol=1e-12)

    def test_round_trip(self):
        """Test forward then inverse on a random real signal."""
        grid = FrequencyGrid(num_points=64, f_min=-32.0, f_max=32.0)
        signal = np.random.default_rng(3).normal(size=(3, 64))
        restored = to_time_domain(to_frequency_domain(signal, grid), grid)
        assert np.linalg.norm(restored - signal) <= 1e-10 * np.linalg.norm(signal)

    def test_delay_of_a_nondispersive_packet(self):
        """Test envelope peak at t = r / c."""
        grid = FrequencyGrid(num_points=256, f_min=-500e3, f_max=500e3)
        table = analytic_dispersion("nondispersive", grid, wave_speed=5000.0)
        weights = Excitation(ExcitationKind.GAUSSIAN, 100e3, 30e3).weights(grid.frequencies)
        spectrum = scatter_spectrum(table, ((0.0, 0.0), (0.5, 0.0)), (0.25, 0.0)) * weights
        envelope = np.abs(hilbert(to_time_domain(spectrum, grid)))
        peak_time = grid.times[int(np.argmax(envelope))]
        assert abs(peak_time - 0.5 / 5000.0) <= grid.sampling_interval

    def test_two_mode_packets_arrive_at_group_delays(self):
        """Test S0 and A0 arrival times against r / v_g at the carrier."""
        material = PlateMaterial()
        grid = FrequencyGrid(num_points=512, f_min=-500e3, f_max=500e3)
        table = solve_rayleigh_lamb(material, grid)
        carrier = 100e3
        weights = Excitation(ExcitationKind.GAUSSIAN, carrier, 15e3).weights(grid.frequencies)
        r = 0.5407
        q = int(np.argmin(np.abs(grid.frequencies - carrier)))
        times = grid.times
        for mode in ("S0", "A0"):
            single = DispersionTable(grid, (mode,), table.kappa[[table.mode_index(mode)]])
            spectrum = scatter_spectrum(single, ((0.0, 0.0), (r, 0.0)), (r / 2, 0.0)) * weights
            envelope = np.abs(hilbert(to_time_domain(spectrum, grid)))
            expected = r / group_velocity(table, mode)[q]
            assert times[int(np.argmax(envelope))] == pytest.approx(expected, rel=0.1)

    def test_asymmetric_spectrum_is_rejected(self):
        """Test the conjugate-symmetry check."""
        grid = FrequencyGrid(num_points=8, f_min=-4.0, f_max=4.0)
        spectrum = np.zeros(8, dtype=complex)
        spectrum[5] = 1.0j
        with pytest.raises(NotConjugateSymmetric):
            to_time_domain(spectrum, grid)

    def test_one_sided_grid_is_rejected(self):
        """Test that only symmetric grids convert to real signals."""
        grid = FrequencyGrid(num_points=8, f_min=0.0, f_max=8.0)
        with pytest.raises(NotConjugateSymmetric):
            to_time_domain(np.zeros(8, dtype=complex), grid)

    def test_wrong_length(self):
        """Test signal length validation."""
        with pytest.raises(DimensionMismatch):
            to_frequency_domain(np.zeros(10), FrequencyGrid(num_points=8, f_min=-4.0, f_max=4.0))


class TestSampleAlpha:
    """Tests for the truncated-normal distortion draw."""

    def test_zero_width(self):
        """Test the degenerate interval."""
        assert sample_alpha(0.0, np.random.default_rng(0)) == 1.0

    def test_bounds(self):
        """Test draws inside [0.85, 1.15]."""
        rng = np.random.default_rng(1)
        draws = np.array([sample_alpha(0.15, rng) for _ in range(2000)])
        assert draws.min() >= 0.85
        assert draws.max() <= 1.15

    def test_matches_truncated_normal(self):
        """Test the histogram against the truncated-normal CDF."""
        rng = np.random.default_rng(2)
        w = 0.3
        draws = np.array([sample_alpha(w, rng) for _ in range(100_000)])
        assert draws.mean() == pytest.approx(1.0, abs=0.005)

        edges = np.linspace(1 - w, 1 + w, 21)
        observed, _ = np.histogram(draws, bins=edges)
        cdf = truncnorm(-w, w, loc=1.0, scale=1.0).cdf(edges)
        expected = np.diff(cdf) * draws.size
        expected *= observed.sum() / expected.sum()
        assert chisquare(observed, expected).pvalue > 0.01

    def test_invalid_width(self):
        """Test the width range."""
        with pytest.raises(InvalidParameter, match="w_distort"):
            sample_alpha(1.0, np.random.default_rng(0))


class TestAwgn:
    """Tests for additive white Gaussian noise."""

    def test_infinite_snr_is_identity(self):
        """Test the noiseless case."""
        signal = np.random.default_rng(0).normal(size=(4, 32))
        noisy = add_awgn(signal, math.inf, np.random.default_rng(1))
        np.testing.assert_array_equal(noisy, signal)
        assert noisy is not signal

    def test_realized_snr(self):
        """Test 5 dB over 100 trials."""
        rng = np.random.default_rng(4)
        signal = rng.normal(size=(28, 256))
        snrs = [realized_snr_db(signal, add_awgn(signal, 5.0, rng)) for _ in range(100)]
        assert np.mean(snrs) == pytest.approx(5.0, abs=0.5)

    def test_very_low_snr(self):
        """Test -50 dB noise power."""
        rng = np.random.default_rng(5)
        signal = rng.normal(size=(8, 128))
        power = np.mean(signal**2)
        ratios = [np.mean((add_awgn(signal, -50.0, rng) - signal) ** 2) / power for _ in range(20)]
        assert np.mean(ratios) == pytest.approx(1e5, rel=0.05)

    def test_zero_signal(self):
        """Test that a silent matrix cannot be noised at finite SNR."""
        with pytest.raises(ZeroSignal):
            add_awgn(np.zeros((2, 8)), 10.0, np.random.default_rng(0))


class TestDrawDamages:
    """Tests for damage placement."""

    def test_distinct_quadrants(self):
        """Test one damage per quadrant."""
        rng = np.random.default_rng(8)
        for _ in range(50):
            damages = draw_damages(DamagePolicy(count=3), 1.0, 2.0, rng)
            quadrants = {quadrant_of(x, y, 1.0, 2.0) for x, y in damages.locations}
            assert len(quadrants) == 3

    def test_up_to_policy(self):
        """Test the variable damage count."""
        rng = np.random.default_rng(9)
        policy = DamagePolicy(DamagePolicyKind.UP_TO, 2)
        counts = {draw_damages(policy, 1.0, 1.0, rng).count for _ in range(100)}
        assert counts == {1, 2}


class TestDatasetGenerator:
    """Tests for dataset generation."""

    def test_counts(self, small_dataset):
        """Test requested split sizes."""
        assert small_dataset.counts == {"train": 12, "val": 4, "test": 4}

    def test_empty_dataset(self, small_scenario):
        """Test zero counts."""
        dataset = generate_dataset(small_scenario, {"train": 0, "val": 0, "test": 0}, 1)
        assert dataset.counts == {"train": 0, "val": 0, "test": 0}
        assert dataset.standardization.dim == small_scenario.input_dim

    def test_standardized_training_split(self, small_dataset):
        """Test zero mean and unit deviation on the train split."""
        features = small_dataset.features("train")
        varying = small_dataset.standardization.std != 1.0
        np.testing.assert_allclose(features.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(features[:, varying].std(axis=0), 1.0, atol=1e-9)

    def test_seed_determinism(self, small_scenario):
        """Test bit-identical datasets from one seed."""
        counts = {"train": 5, "val": 2, "test": 2}
        first = generate_dataset(small_scenario, counts, 42, threads=1)
        second = generate_dataset(small_scenario, counts, 42, threads=4)
        for split in ("train", "val", "test"):
            np.testing.assert_array_equal(first.features(split), second.features(split))
            np.testing.assert_array_equal(first.targets(split)[0], second.targets(split)[0])

    def test_different_seeds_differ(self, small_scenario):
        """Test that the master seed matters."""
        counts = {"train": 3}
        first = generate_dataset(small_scenario, counts, 1)
        second = generate_dataset(small_scenario, counts, 2)
        assert not np.array_equal(first.targets("train")[0], second.targets("train")[0])

    def test_noise_seed_only_changes_noise(self, small_scenario):
        """Test the separate noise stream."""
        noisy = replace(small_scenario, uncertainty=UncertaintySpec(snr_db=10.0, noise_seed=1))
        other = replace(small_scenario, uncertainty=UncertaintySpec(snr_db=10.0, noise_seed=2))
        first = DatasetGenerator(noisy, 5, quiet=True).simulate("train", 0)
        second = DatasetGenerator(other, 5, quiet=True).simulate("train", 0)
        np.testing.assert_array_equal(first.truth.locations, second.truth.locations)
        assert not np.array_equal(first.signals, second.signals)

    def test_alpha_within_bounds(self, small_scenario):
        """Test per-sample distortion draws."""
        scenario = replace(small_scenario, uncertainty=UncertaintySpec(w_distort=0.15))
        dataset = generate_dataset(scenario, {"train": 20}, 3)
        alphas = [s.alpha_used for s in dataset.samples("train")]
        assert all(0.85 <= a <= 1.15 for a in alphas)
        assert len(set(alphas)) > 1

    def test_realized_snr_is_recorded(self, small_scenario):
        """Test per-sample SNR bookkeeping."""
        scenario = replace(small_scenario, uncertainty=UncertaintySpec(snr_db=5.0))
        dataset = generate_dataset(scenario, {"train": 10}, 3)
        assert mean_realized_snr(dataset.samples("train")) == pytest.approx(5.0, abs=1.0)

    def test_raw_signals_are_noiseless_spectra(self, small_dataset, small_table):
        """Test that unstandardized signals invert to the synthesized spectra."""
        sample = small_dataset.samples("test")[0]
        raw = small_dataset.raw_signals("test")[0]
        spectra = multistatic_spectra(
            small_table, small_dataset.scenario.sensors, sample.truth.locations
        )
        np.testing.assert_allclose(
            to_frequency_domain(raw, small_table.grid), spectra, atol=1e-9 * np.abs(spectra).max()
        )

    def test_unknown_split(self, small_scenario):
        """Test split name validation."""
        with pytest.raises(InvalidParameter):
            generate_dataset(small_scenario, {"holdout": 1}, 0)
