"""Metrics and comparison sweeps."""

from wavelocate.evaluation.metrics import (
    ale,
    assign_components,
    ci95_coverage,
    density_surface,
    random_baseline_ale,
    uncertainty_summaries,
)
from wavelocate.evaluation.sweep import PRESETS, SweepSpec, evaluate_split, run_sweep

__all__ = [
    "PRESETS",
    "SweepSpec",
    "ale",
    "assign_components",
    "ci95_coverage",
    "density_surface",
    "evaluate_split",
    "random_baseline_ale",
    "run_sweep",
    "uncertainty_summaries",
]
