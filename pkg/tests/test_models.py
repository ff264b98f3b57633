"""Tests for the data models."""

import math

import numpy as np
import pytest

from wavelocate.core.errors import (
    ConfigError,
    DimensionMismatch,
    InvalidDamageCount,
    InvalidMaterial,
    InvalidParameter,
)
from wavelocate.core.models import (
    DamagePolicy,
    DamageSet,
    Excitation,
    ExcitationKind,
    FrequencyGrid,
    GmmPrediction,
    LrSchedule,
    MetricRow,
    NetworkSpec,
    PlateMaterial,
    QueryGrid,
    ScenarioConfig,
    SensorArray,
    Standardization,
    TrainConfig,
    UncertaintySpec,
    decode_float,
    encode_float,
    quadrant_of,
)


class TestPlateMaterial:
    """Tests for PlateMaterial."""

    def test_plate_velocity(self):
        """Test the closed-form low-frequency S0 velocity."""
        material = PlateMaterial(youngs_modulus=69e9, poisson_ratio=0.33, density=2700.0)
        expected = math.sqrt(69e9 / (2700.0 * (1 - 0.33**2)))
        assert material.plate_velocity == pytest.approx(expected)
        assert material.shear_velocity < material.plate_velocity < material.longitudinal_velocity

    def test_rejects_poisson_ratio_above_half(self):
        """Test that the error names the offending field."""
        with pytest.raises(InvalidMaterial, match="plate.poisson_ratio"):
            PlateMaterial(poisson_ratio=0.7)

    def test_rejects_non_positive_thickness(self):
        """Test thickness validation."""
        with pytest.raises(InvalidMaterial, match="plate.thickness"):
            PlateMaterial(thickness=0.0)

    def test_config_errors_are_value_errors(self):
        """Test that configuration errors can be caught as ValueError."""
        with pytest.raises(ValueError):
            PlateMaterial(density=-1.0)


class TestFrequencyGrid:
    """Tests for FrequencyGrid."""

    def test_symmetric_grid_contains_zero_and_nyquist(self):
        """Test bin placement on the fftshifted grid."""
        grid = FrequencyGrid(num_points=8, f_min=-400.0, f_max=400.0)
        assert grid.is_symmetric
        np.testing.assert_array_equal(
            grid.frequencies, [-400.0, -300.0, -200.0, -100.0, 0.0, 100.0, 200.0, 300.0]
        )

    def test_sampling_interval(self):
        """Test the time step implied by the grid span."""
        grid = FrequencyGrid(num_points=256, f_min=-500e3, f_max=500e3)
        assert grid.sampling_interval == pytest.approx(1e-6)
        assert grid.times.shape == (256,)

    def test_rejects_inverted_bounds(self):
        """Test f_max > f_min validation."""
        with pytest.raises(InvalidParameter):
            FrequencyGrid(num_points=16, f_min=10.0, f_max=-10.0)


class TestSensorArray:
    """Tests for SensorArray."""

    def test_pairs_are_lexicographic(self):
        """Test the pair index ordering."""
        sensors = SensorArray(np.zeros((4, 2)))
        assert sensors.pair_index == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        assert sensors.num_pairs == 6

    def test_eight_sensors_give_28_pairs(self):
        """Test the pair count of the default array size."""
        sensors = SensorArray.random(8, 1.0, 1.0, np.random.default_rng(0))
        assert sensors.num_pairs == 28
        assert sensors.transmitters.shape == (28, 2)

    def test_requires_two_sensors(self):
        """Test the minimum sensor count."""
        with pytest.raises(InvalidParameter):
            SensorArray(np.zeros((1, 2)))


class TestDamageSet:
    """Tests for DamageSet padding."""

    def test_padded_uses_nan(self):
        """Test NaN padding of unused slots."""
        damages = DamageSet(np.array([[0.2, 0.3]]))
        padded = damages.padded(3)
        np.testing.assert_array_equal(padded[:2], [0.2, 0.3])
        assert np.isnan(padded[2:]).all()

    def test_from_padded_restores_locations(self):
        """Test reading back padded coordinates."""
        locations = np.array([[0.1, 0.2], [0.7, 0.8]])
        restored = DamageSet.from_padded(DamageSet(locations).padded(4), 2)
        np.testing.assert_array_equal(restored.locations, locations)

    def test_too_many_damages(self):
        """Test padding beyond k_max."""
        with pytest.raises(InvalidDamageCount):
            DamageSet(np.zeros((3, 2))).padded(2)


class TestDamagePolicy:
    """Tests for DamagePolicy."""

    def test_at_most_four_damages(self):
        """Test the one-per-quadrant limit."""
        with pytest.raises(InvalidDamageCount, match="uncertainty.num_damages"):
            DamagePolicy(count=5)


class TestExcitation:
    """Tests for excitation weights."""

    def test_impulse_is_flat(self):
        """Test unit weights for the impulse."""
        np.testing.assert_array_equal(Excitation().weights(np.array([-1e5, 0.0, 1e5])), 1.0)

    def test_gaussian_is_symmetric_in_frequency(self):
        """Test that the window peaks at +/- f_c."""
        excitation = Excitation(ExcitationKind.GAUSSIAN, center_frequency=100e3, bandwidth=20e3)
        weights = excitation.weights(np.array([-100e3, 0.0, 100e3]))
        assert weights[0] == weights[2] == 1.0
        assert weights[1] == pytest.approx(math.exp(-12.5))


class TestUncertaintySpec:
    """Tests for UncertaintySpec."""

    def test_alpha_bounds(self):
        """Test the truncation interval."""
        assert UncertaintySpec(w_distort=0.15).alpha_bounds == pytest.approx((0.85, 1.15))

    def test_infinite_snr_round_trip(self):
        """Test JSON encoding of a noiseless scenario."""
        spec = UncertaintySpec(snr_db=math.inf)
        data = spec.to_dict()
        assert data["snr_db"] == "inf"
        assert UncertaintySpec.from_dict(data).snr_db == math.inf


class TestScenarioConfig:
    """Tests for ScenarioConfig."""

    def test_input_dim(self, small_scenario):
        """Test input size M * Q."""
        assert small_scenario.signal_shape == (6, 64)
        assert small_scenario.input_dim == 384

    def test_sensors_must_lie_on_plate(self):
        """Test the sensor bounds check."""
        with pytest.raises(InvalidParameter, match="sensors.positions"):
            ScenarioConfig(sensors=SensorArray(np.array([[0.0, 0.0], [1.5, 0.5]])))

    def test_dict_round_trip(self, small_scenario):
        """Test to_dict/from_dict."""
        restored = ScenarioConfig.from_dict(small_scenario.to_dict())
        np.testing.assert_array_equal(
            restored.sensors.positions, small_scenario.sensors.positions
        )
        assert restored.grid == small_scenario.grid
        assert restored.dispersion == small_scenario.dispersion


class TestStandardization:
    """Tests for Standardization."""

    def test_zero_variance_features_keep_unit_scale(self):
        """Test constant columns."""
        features = np.array([[1.0, 5.0], [3.0, 5.0]])
        fitted = Standardization.fit(features)
        np.testing.assert_array_equal(fitted.std, [1.0, 1.0])
        np.testing.assert_allclose(fitted.apply(features), [[-1.0, 0.0], [1.0, 0.0]])

    def test_dimension_check(self):
        """Test mismatched widths."""
        with pytest.raises(DimensionMismatch):
            Standardization.identity(3).apply(np.zeros(4))


class TestQueryGrid:
    """Tests for QueryGrid."""

    def test_row_major_points(self):
        """Test that x varies fastest."""
        grid = QueryGrid(1.0, 1.0, nx=3, ny=2)
        assert grid.point(0) == (0.0, 0.0)
        assert grid.point(1) == (0.5, 0.0)
        assert grid.point(3) == (0.0, 1.0)
        np.testing.assert_array_equal(grid.points[4], [0.5, 1.0])

    def test_quadrants(self):
        """Test quadrant labels of grid points."""
        grid = QueryGrid(1.0, 1.0, nx=3, ny=3)
        assert grid.quadrants().tolist() == [0, 1, 1, 2, 3, 3, 2, 3, 3]
        assert quadrant_of(0.2, 0.8, 1.0, 1.0) == 2


class TestNetworkSpec:
    """Tests for NetworkSpec."""

    def test_output_dim(self):
        """Test (2d+1)k output units."""
        spec = NetworkSpec(input_dim=10, hidden=(4,), num_components=3)
        assert spec.output_dim == 15
        assert spec.param_shapes == [(10, 4), (4,), (4, 15), (15,)]

    def test_rejects_dropout_of_one(self):
        """Test dropout range."""
        with pytest.raises(InvalidParameter, match="network.dropout"):
            NetworkSpec(input_dim=4, dropout=1.0)


class TestTrainConfig:
    """Tests for TrainConfig."""

    def test_dict_round_trip(self):
        """Test to_dict/from_dict."""
        config = TrainConfig(learning_rate=0.01, seed=99, cv_dropouts=(0.1,))
        assert TrainConfig.from_dict(config.to_dict()) == config

    def test_invalid_batch_size(self):
        """Test batch size validation."""
        with pytest.raises(ConfigError):
            TrainConfig(batch_size=0)

    def test_ceiling_must_exceed_floor(self):
        """Test the variance bounds."""
        with pytest.raises(InvalidParameter, match="variance_ceiling"):
            TrainConfig(variance_floor=1e-3, variance_ceiling=1e-3)

    def test_negative_penalty(self):
        """Test penalty weight validation."""
        with pytest.raises(InvalidParameter, match="penalty"):
            TrainConfig(mean_penalty=-1.0)

    def test_training_defaults(self):
        """Test the schedule and prior defaults."""
        config = TrainConfig()
        assert config.epochs == 300
        assert config.lr_schedule is LrSchedule.COSINE
        assert config.restore_best
        assert config.variance_ceiling == 1.0


class TestGmmPrediction:
    """Tests for GmmPrediction."""

    def test_from_points_is_degenerate(self):
        """Test point estimates as zero-variance mixtures."""
        prediction = GmmPrediction.from_points(np.array([[0.1, 0.2], [0.3, 0.4]]))
        np.testing.assert_array_equal(prediction.weights, [0.5, 0.5])
        assert not prediction.variances.any()

    def test_weights_must_sum_to_one(self):
        """Test weight normalization check."""
        with pytest.raises(InvalidParameter):
            GmmPrediction(np.zeros((2, 2)), np.ones((2, 2)), np.array([0.5, 0.6]))


class TestMetricRow:
    """Tests for MetricRow serialization."""

    def test_nan_and_inf_round_trip(self):
        """Test that non-applicable metrics survive JSON encoding."""
        row = MetricRow(
            snr_db=math.inf, w_distort=0.0, num_damages=1, method="mfp", ale=0.01, ale_std=0.0
        )
        data = row.to_dict()
        assert data["snr_db"] == "inf"
        assert data["ci95"] is None
        restored = MetricRow.from_dict(data)
        assert restored.snr_db == math.inf
        assert math.isnan(restored.ci95)


class TestFloatEncoding:
    """Tests for encode_float/decode_float."""

    def test_infinity_spellings(self):
        """Test accepted infinity strings."""
        assert decode_float("infinite") == math.inf
        assert decode_float("-inf") == -math.inf
        assert encode_float(2.5) == 2.5
