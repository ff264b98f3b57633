"""Closed-form dispersion models used as test doubles for the solver."""

import math

import numpy as np

from wavelocate.core.errors import InvalidParameter
from wavelocate.core.interfaces import DispersionModel
from wavelocate.core.models import DispersionSpec, DispersionTable, FrequencyGrid, PlateMaterial


def _require_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise InvalidParameter(f"plate.{name} must be positive, got {value}")


class NondispersiveModel(DispersionModel):
    """Single mode with constant phase velocity: kappa = omega / c."""

    def __init__(self, wave_speed: float) -> None:
        _require_positive("wave_speed", wave_speed)
        self.wave_speed = wave_speed

    @classmethod
    def from_spec(cls, spec: DispersionSpec, material: PlateMaterial) -> "NondispersiveModel":
        return cls(spec.wave_speed)

    @property
    def name(self) -> str:
        return "nondispersive"

    def compute(self, grid: FrequencyGrid) -> DispersionTable:
        kappa = grid.omega / self.wave_speed
        return DispersionTable(grid, (self.name,), kappa[np.newaxis, :])


class PowerLawModel(DispersionModel):
    """Single mode with kappa = a * sign(omega) * |omega|**b."""

    def __init__(self, a: float, b: float) -> None:
        _require_positive("power_a", a)
        _require_positive("power_b", b)
        self.a = a
        self.b = b

    @classmethod
    def from_spec(cls, spec: DispersionSpec, material: PlateMaterial) -> "PowerLawModel":
        return cls(spec.power_a, spec.power_b)

    @property
    def name(self) -> str:
        return "power_law"

    def compute(self, grid: FrequencyGrid) -> DispersionTable:
        omega = grid.omega
        kappa = self.a * np.sign(omega) * np.abs(omega) ** self.b
        return DispersionTable(grid, (self.name,), kappa[np.newaxis, :])


def analytic_dispersion(
    model: str,
    grid: FrequencyGrid,
    *,
    wave_speed: float = 5000.0,
    a: float = 1.0,
    b: float = 1.0,
) -> DispersionTable:
    """Evaluate an analytic dispersion model on a grid.

    Args:
        model: "nondispersive" or "power_law".
        grid: Frequency grid.
        wave_speed: Phase velocity c of the nondispersive model (m/s).
        a: Power-law coefficient.
        b: Power-law exponent.

    Returns:
        Single-mode dispersion table.

    Raises:
        InvalidParameter: Unknown model or non-positive constants.
    """
    if model == "nondispersive":
        return NondispersiveModel(wave_speed).compute(grid)
    if model == "power_law":
        return PowerLawModel(a, b).compute(grid)
    raise InvalidParameter(f"unknown analytic dispersion model {model!r}")
