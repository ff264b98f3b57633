"""Abstract interfaces for wavelocate."""

from abc import ABC, abstractmethod
from pathlib import Path

from wavelocate.core.models import (
    AmbiguitySurface,
    Dataset,
    DispersionSpec,
    DispersionTable,
    FrequencyGrid,
    GmmPrediction,
    MetricReport,
    ModelArtifact,
    PlateMaterial,
)


class DispersionModel(ABC):
    """Strategy that produces wavenumbers on a frequency grid."""

    @classmethod
    @abstractmethod
    def from_spec(cls, spec: DispersionSpec, material: PlateMaterial) -> "DispersionModel":
        """Build the model from its configuration.

        Args:
            spec: Dispersion section of the scenario.
            material: Plate material (ignored by analytic models).

        Returns:
            Configured model.
        """
        ...

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the model name used in configuration."""
        ...

    @abstractmethod
    def compute(self, grid: FrequencyGrid) -> DispersionTable:
        """Evaluate the dispersion relation on every bin of the grid.

        Args:
            grid: Frequency grid.

        Returns:
            Table of wavenumbers, odd in frequency.
        """
        ...


class Localizer(ABC):
    """A damage localization method evaluated on dataset splits."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the method name ("mdn" or "mfp")."""
        ...

    @abstractmethod
    def predict_split(self, dataset: Dataset, split: str) -> list[GmmPrediction]:
        """Predict damage locations for every sample of a split.

        Args:
            dataset: Dataset holding the split.
            split: Split name.

        Returns:
            One prediction per sample; point estimates are degenerate mixtures.
        """
        ...

    @property
    def reports_uncertainty(self) -> bool:
        """Whether predictions carry meaningful variances."""
        return False


class StorageBackend(ABC):
    """Abstract base class for artifact storage."""

    @abstractmethod
    def save_dataset(self, dataset: Dataset, output_dir: Path) -> None:
        """Write a dataset directory."""
        ...

    @abstractmethod
    def load_dataset(self, input_dir: Path) -> Dataset:
        """Read a dataset directory."""
        ...

    @abstractmethod
    def save_model(self, model: ModelArtifact, output_dir: Path) -> None:
        """Write a model artifact."""
        ...

    @abstractmethod
    def load_model(self, input_dir: Path) -> ModelArtifact:
        """Read a model artifact."""
        ...

    @abstractmethod
    def save_report(self, report: MetricReport, output_dir: Path) -> None:
        """Write a metric report as CSV plus JSON mirror."""
        ...

    @abstractmethod
    def save_surface(self, surface: AmbiguitySurface, stem: Path) -> None:
        """Write a surface as CSV and 16-bit PGM next to each other."""
        ...

    @abstractmethod
    def save_dispersion(self, table: DispersionTable, path: Path) -> None:
        """Write a dispersion table as CSV."""
        ...
