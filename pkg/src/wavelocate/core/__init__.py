"""Core models, interfaces, errors and configuration for wavelocate."""

from wavelocate.core.config import RunConfig
from wavelocate.core.errors import (
    ConfigError,
    DivergedTraining,
    NumericError,
    StorageError,
    WavelocateError,
)
from wavelocate.core.interfaces import DispersionModel, Localizer, StorageBackend
from wavelocate.core.models import (
    DamageSet,
    Dataset,
    DispersionTable,
    FrequencyGrid,
    GmmPrediction,
    MetricReport,
    MetricRow,
    ModelArtifact,
    NetworkSpec,
    PlateMaterial,
    QueryGrid,
    ScenarioConfig,
    SensorArray,
    TrainConfig,
)

__all__ = [
    "RunConfig",
    # Errors
    "ConfigError",
    "DivergedTraining",
    "NumericError",
    "StorageError",
    "WavelocateError",
    # Interfaces
    "DispersionModel",
    "Localizer",
    "StorageBackend",
    # Models
    "DamageSet",
    "Dataset",
    "DispersionTable",
    "FrequencyGrid",
    "GmmPrediction",
    "MetricReport",
    "MetricRow",
    "ModelArtifact",
    "NetworkSpec",
    "PlateMaterial",
    "QueryGrid",
    "ScenarioConfig",
    "SensorArray",
    "TrainConfig",
]
