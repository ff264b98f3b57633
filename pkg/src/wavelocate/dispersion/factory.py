"""Factory for creating dispersion models."""

import functools
import logging

from wavelocate.core.errors import InvalidParameter
from wavelocate.core.interfaces import DispersionModel
from wavelocate.core.models import DispersionSpec, DispersionTable, FrequencyGrid, PlateMaterial

logger = logging.getLogger(__name__)


class DispersionModelFactory:
    """Factory for dispersion models selected by name in the run configuration."""

    # Registry of known models (lazy-loaded to avoid circular imports)
    _MODELS: dict[str, type[DispersionModel]] | None = None

    @classmethod
    def _load_models(cls) -> dict[str, type[DispersionModel]]:
        """Lazy-load the built-in models."""
        if cls._MODELS is None:
            from wavelocate.dispersion.analytic import NondispersiveModel, PowerLawModel
            from wavelocate.dispersion.rayleigh_lamb import RayleighLambModel

            cls._MODELS = {
                "rayleigh_lamb": RayleighLambModel,
                "nondispersive": NondispersiveModel,
                "power_law": PowerLawModel,
            }
        return cls._MODELS

    @classmethod
    def get_model(cls, spec: DispersionSpec, material: PlateMaterial) -> DispersionModel:
        """Get a configured dispersion model.

        Args:
            spec: Dispersion section of the scenario.
            material: Plate material.

        Returns:
            Dispersion model instance.

        Raises:
            InvalidParameter: If the model name is not registered.
        """
        models = cls._load_models()
        model_class = models.get(spec.model.lower())
        if model_class is None:
            raise InvalidParameter(
                f"plate.dispersion {spec.model!r} is not one of: {', '.join(sorted(models))}"
            )
        return model_class.from_spec(spec, material)

    @classmethod
    def list_models(cls) -> list[str]:
        """List all known models."""
        return list(cls._load_models().keys())

    @classmethod
    def register_model(cls, name: str, model_class: type[DispersionModel]) -> None:
        """Register a new dispersion model.

        Args:
            name: Model name as used in `plate.dispersion`.
            model_class: Model class.
        """
        cls._load_models()[name.lower()] = model_class
        build_table.cache_clear()


@functools.lru_cache(maxsize=16)
def build_table(
    spec: DispersionSpec, material: PlateMaterial, grid: FrequencyGrid
) -> DispersionTable:
    """Compute (once per distinct input) the dispersion table of a scenario.

    The returned table is shared between callers and its array is read-only.
    """
    model = DispersionModelFactory.get_model(spec, material)
    table = model.compute(grid)
    table.kappa.setflags(write=False)
    logger.info(
        "dispersion %s: %d mode(s) on %d bins", model.name, table.num_modes, grid.num_points
    )
    return table
