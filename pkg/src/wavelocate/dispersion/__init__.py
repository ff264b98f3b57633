"""Lamb-wave dispersion relations."""

from wavelocate.dispersion.analytic import NondispersiveModel, PowerLawModel, analytic_dispersion
from wavelocate.dispersion.factory import DispersionModelFactory, build_table
from wavelocate.dispersion.rayleigh_lamb import RayleighLambModel, solve_rayleigh_lamb
from wavelocate.dispersion.velocity import group_velocity, phase_velocity

__all__ = [
    "DispersionModelFactory",
    "NondispersiveModel",
    "PowerLawModel",
    "RayleighLambModel",
    "analytic_dispersion",
    "build_table",
    "group_velocity",
    "phase_velocity",
    "solve_rayleigh_lamb",
]
