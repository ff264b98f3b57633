"""Multistatic scatter synthesis, uncertainty injection and dataset generation."""

from wavelocate.wavefield.generator import DatasetGenerator, draw_sensors, generate_dataset
from wavelocate.wavefield.synthesis import (
    multistatic_spectra,
    scatter_spectrum,
    to_frequency_domain,
    to_time_domain,
)
from wavelocate.wavefield.uncertainty import add_awgn, sample_alpha

__all__ = [
    "DatasetGenerator",
    "add_awgn",
    "draw_sensors",
    "generate_dataset",
    "multistatic_spectra",
    "sample_alpha",
    "scatter_spectrum",
    "to_frequency_domain",
    "to_time_domain",
]
