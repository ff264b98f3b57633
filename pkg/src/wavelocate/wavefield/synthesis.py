"""Frequency-domain synthesis of baseline-subtracted scatter signals.

Each transmitter-receiver pair sees the damage as a point scatterer on the
path tx -> damage -> rx. The received spectrum sums the retained modes:

    X(omega) = sum_n (alpha |kappa_n| r)^(-1/2) exp(-j alpha kappa_n r)

which is conjugate-symmetric because kappa is odd in omega.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from wavelocate.core.errors import (
    DimensionMismatch,
    NotConjugateSymmetric,
    PathTooShort,
    ZeroWavenumber,
)
from wavelocate.core.models import (
    ComplexArray,
    DispersionTable,
    FloatArray,
    FrequencyGrid,
    SensorArray,
)

SYMMETRY_TOLERANCE = 1e-9


def path_lengths(transmitters: ArrayLike, receivers: ArrayLike, damage: ArrayLike) -> FloatArray:
    """Scatter path length |tx - damage| + |damage - rx| for each pair."""
    tx = np.asarray(transmitters, dtype=np.float64)
    rx = np.asarray(receivers, dtype=np.float64)
    d = np.asarray(damage, dtype=np.float64)
    out = np.hypot(tx[..., 0] - d[0], tx[..., 1] - d[1])
    out = out + np.hypot(d[0] - rx[..., 0], d[1] - rx[..., 1])
    return np.asarray(out, dtype=np.float64)


def silent_bins(grid: FrequencyGrid) -> NDArray[np.bool_]:
    """Mask of bins forced to zero: DC, and the Nyquist bin of a symmetric grid."""
    freqs = grid.frequencies
    mask = np.abs(freqs) <= 1e-9 * grid.spacing
    if grid.is_symmetric:
        mask[0] = True
    return mask


def _path_spectra(
    table: DispersionTable, alpha: float, r: FloatArray, r_floor: float
) -> ComplexArray:
    """Spectra (P, Q) for P path lengths, summed over the table's modes."""
    short = np.nonzero(r <= r_floor)[0]
    if short.size:
        raise PathTooShort(
            f"scatter path {float(r[short[0]]):.3g} m is not above r_floor={r_floor:g} m"
        )
    silent = silent_bins(table.grid)
    scaled = alpha * table.kappa  # (N, Q)
    if np.any(scaled[:, ~silent] == 0):
        raise ZeroWavenumber("a nonzero frequency bin has zero wavenumber")

    safe = np.where(silent, 1.0, scaled)
    phase = safe[np.newaxis, :, :] * r[:, np.newaxis, np.newaxis]  # (P, N, Q)
    terms = np.exp(-1j * phase) / np.sqrt(np.abs(phase))
    spectra = terms.sum(axis=1)
    spectra[:, silent] = 0.0
    return np.asarray(spectra, dtype=np.complex128)


def scatter_spectrum(
    table: DispersionTable,
    pair: tuple[ArrayLike, ArrayLike],
    damage: ArrayLike,
    alpha: float = 1.0,
    *,
    r_floor: float = 1e-3,
) -> ComplexArray:
    """Spectrum received over one pair from a single point scatterer.

    Args:
        table: Dispersion table (all modes are summed).
        pair: Transmitter and receiver positions.
        damage: Damage position (x, y).
        alpha: Multiplicative wavenumber distortion.
        r_floor: Minimum admissible path length in meters.

    Returns:
        Complex spectrum over the table's bins.

    Raises:
        PathTooShort: If the path is not longer than r_floor.
        ZeroWavenumber: If a nonzero bin has kappa = 0.
    """
    tx, rx = pair
    r = path_lengths(np.atleast_2d(tx), np.atleast_2d(rx), damage)
    return _path_spectra(table, alpha, r, r_floor)[0]


def multistatic_spectra(
    table: DispersionTable,
    sensors: SensorArray,
    damages: FloatArray,
    alpha: float = 1.0,
    *,
    r_floor: float = 1e-3,
    weights: FloatArray | None = None,
) -> ComplexArray:
    """Superposed scatter spectra of every sensor pair, shape (M, Q).

    Args:
        table: Dispersion table.
        sensors: Sensor array; rows follow its pair index.
        damages: Damage locations (K, 2).
        alpha: Wavenumber distortion shared by all pairs and modes.
        r_floor: Minimum admissible path length.
        weights: Optional excitation weights per bin.

    Returns:
        Complex spectra, one row per pair.
    """
    tx, rx = sensors.transmitters, sensors.receivers
    total = np.zeros((sensors.num_pairs, table.grid.num_points), dtype=np.complex128)
    for damage in np.asarray(damages, dtype=np.float64).reshape(-1, 2):
        total += _path_spectra(table, alpha, path_lengths(tx, rx, damage), r_floor)
    if weights is not None:
        total *= weights
    return total


def _unshifted(spectrum: ComplexArray) -> ComplexArray:
    return np.fft.ifftshift(spectrum, axes=-1)


def check_conjugate_symmetry(spectrum: ComplexArray, grid: FrequencyGrid) -> None:
    """Raise NotConjugateSymmetric unless X(-f) = conj(X(f)) within tolerance."""
    if not grid.is_symmetric:
        raise NotConjugateSymmetric(
            "time-domain conversion needs an even grid with f_min = -f_max"
        )
    natural = _unshifted(np.asarray(spectrum))
    size = natural.shape[-1]
    mirrored = np.conj(natural[..., (-np.arange(size)) % size])
    scale = max(float(np.max(np.abs(natural), initial=0.0)), 1e-300)
    mismatch = float(np.max(np.abs(natural - mirrored), initial=0.0))
    if mismatch > SYMMETRY_TOLERANCE * scale:
        raise NotConjugateSymmetric(
            f"spectrum is not conjugate-symmetric (relative mismatch {mismatch / scale:.3g})"
        )


def to_time_domain(spectrum: ComplexArray, grid: FrequencyGrid) -> FloatArray:
    """Inverse DFT of spectra on the fftshifted grid (last axis); Q_t = Q."""
    check_conjugate_symmetry(spectrum, grid)
    signal = np.fft.ifft(_unshifted(np.asarray(spectrum)), axis=-1)
    norm = float(np.linalg.norm(signal))
    residue = float(np.linalg.norm(signal.imag))
    if norm > 0 and residue > SYMMETRY_TOLERANCE * norm:
        raise NotConjugateSymmetric(f"imaginary residue {residue / norm:.3g} of output norm")
    return np.ascontiguousarray(signal.real)


def to_frequency_domain(signals: FloatArray, grid: FrequencyGrid) -> ComplexArray:
    """Forward DFT of real time signals (last axis) onto the fftshifted grid."""
    if signals.shape[-1] != grid.num_points:
        raise DimensionMismatch(
            f"signal length {signals.shape[-1]} does not match the {grid.num_points}-bin grid"
        )
    return np.fft.fftshift(np.fft.fft(signals, axis=-1), axes=-1)
