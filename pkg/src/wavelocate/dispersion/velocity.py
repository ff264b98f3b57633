"""Phase and group velocities derived from a dispersion table."""

import numpy as np

from wavelocate.core.errors import DegenerateTable
from wavelocate.core.models import DispersionTable, FloatArray, Mode


def group_velocity(table: DispersionTable, mode: str | Mode) -> FloatArray:
    """Group velocity d(omega)/d(kappa) by central differences (one-sided at the ends).

    Args:
        table: Dispersion table with at least three bins.
        mode: Mode name present in the table.

    Returns:
        Group velocity in m/s per frequency bin.

    Raises:
        DegenerateTable: Too few bins, or kappa locally constant.
    """
    if table.grid.num_points < 3:
        raise DegenerateTable(
            f"group velocity needs at least 3 bins, table has {table.grid.num_points}"
        )
    kappa = table.kappa[table.mode_index(mode)]
    d_kappa = np.gradient(kappa)
    flat = np.nonzero(d_kappa == 0)[0]
    if flat.size:
        raise DegenerateTable(
            f"kappa of {mode} is locally constant at bin {int(flat[0])}; slope is zero"
        )
    return np.asarray(np.gradient(table.omega) / d_kappa, dtype=np.float64)


def phase_velocity(table: DispersionTable, mode: str | Mode) -> FloatArray:
    """omega / kappa per bin, NaN where kappa is zero."""
    kappa = table.kappa[table.mode_index(mode)]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(kappa != 0, table.omega / np.where(kappa != 0, kappa, 1.0), np.nan)
