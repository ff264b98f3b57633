"""Pytest configuration and fixtures."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from wavelocate.core.models import (
    DamagePolicy,
    DispersionSpec,
    FrequencyGrid,
    PlateMaterial,
    ScenarioConfig,
    SensorArray,
    UncertaintySpec,
)
from wavelocate.dispersion.factory import build_table
from wavelocate.wavefield.generator import generate_dataset


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def aluminium():
    """Default aluminium plate, 3 mm thick."""
    return PlateMaterial()


@pytest.fixture
def small_grid():
    """Symmetric 64-bin grid up to 200 kHz."""
    return FrequencyGrid(num_points=64, f_min=-200e3, f_max=200e3)


@pytest.fixture
def corner_sensors():
    """Four sensors near the corners of the unit plate."""
    return SensorArray(np.array([[0.1, 0.1], [0.9, 0.15], [0.15, 0.85], [0.85, 0.9]]))


@pytest.fixture
def nondispersive_spec():
    """Single nondispersive mode at 5000 m/s."""
    return DispersionSpec(model="nondispersive", wave_speed=5000.0)


@pytest.fixture
def small_scenario(corner_sensors, small_grid, nondispersive_spec):
    """Fast noiseless single-damage scenario on the unit plate."""
    return ScenarioConfig(
        sensors=corner_sensors,
        dispersion=nondispersive_spec,
        grid=small_grid,
        uncertainty=UncertaintySpec(),
        damage_policy=DamagePolicy(),
    )


@pytest.fixture
def small_table(small_scenario):
    """Dispersion table of the small scenario."""
    return build_table(small_scenario.dispersion, small_scenario.material, small_scenario.grid)


@pytest.fixture
def small_dataset(small_scenario):
    """12/4/4 noiseless dataset of the small scenario."""
    return generate_dataset(small_scenario, {"train": 12, "val": 4, "test": 4}, master_seed=7)


@pytest.fixture
def toy_config_text():
    """Run configuration for quick CLI runs."""
    return """
seed = 11

[plate]
dispersion = "nondispersive"

[sensors]
count = 4

[frequencies]
num_points = 32
f_min = -100e3
f_max = 100e3

[network]
hidden = [16, 8]
components = 2

[training]
epochs = 3
batch_size = 8
train_samples = 10
val_samples = 2
test_samples = 2

[mfp]
nx = 11
ny = 9

[io]
quiet = true
"""


@pytest.fixture
def toy_config(temp_dir, toy_config_text):
    """Path of the quick run configuration."""
    path = temp_dir / "run.toml"
    path.write_text(toy_config_text, encoding="utf-8")
    return path
