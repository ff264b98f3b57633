"""Environmental (wavenumber distortion) and sensor (AWGN) uncertainty."""

import math

import numpy as np
from scipy.special import erf

from wavelocate.core.errors import InvalidParameter, ZeroSignal
from wavelocate.core.models import FloatArray

MAX_BATCH = 1 << 20


def sample_alpha(w_distort: float, rng: np.random.Generator) -> float:
    """Draw alpha ~ N(1, 1) truncated to [1 - w_distort, 1 + w_distort] by rejection.

    Normals are drawn in batches sized from the acceptance probability so narrow
    intervals do not loop one draw at a time; the first accepted draw is returned.
    """
    if not 0 <= w_distort < 1:
        raise InvalidParameter(f"uncertainty.w_distort must be in [0, 1), got {w_distort}")
    if w_distort == 0:
        return 1.0
    low, high = 1.0 - w_distort, 1.0 + w_distort
    acceptance = float(erf(w_distort / math.sqrt(2.0)))
    batch = int(min(MAX_BATCH, max(16, math.ceil(2.0 / acceptance))))
    while True:
        draws = rng.normal(1.0, 1.0, size=batch)
        hits = np.nonzero((draws >= low) & (draws <= high))[0]
        if hits.size:
            return float(draws[hits[0]])


def signal_power(signals: FloatArray) -> float:
    """Mean per-element power of a signal matrix."""
    return float(np.mean(np.square(signals)))


def add_awgn(signals: FloatArray, snr_db: float, rng: np.random.Generator) -> FloatArray:
    """Add white Gaussian noise at a target SNR against the whole matrix's power.

    Args:
        signals: Real signal matrix.
        snr_db: Target SNR in dB; +inf returns the input unchanged.
        rng: Noise stream.

    Returns:
        Noisy copy of the signals.

    Raises:
        ZeroSignal: If the signal power is zero and the SNR is finite.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return signals.copy()
    power = signal_power(signals)
    if power == 0:
        raise ZeroSignal("cannot add noise at a finite SNR to an all-zero signal")
    noise_std = math.sqrt(power / 10 ** (snr_db / 10))
    return signals + rng.normal(0.0, noise_std, size=signals.shape)


def realized_snr_db(clean: FloatArray, noisy: FloatArray) -> float:
    """SNR actually realized by a noise draw; +inf when nothing was added."""
    noise_power = signal_power(noisy - clean)
    if noise_power == 0:
        return math.inf
    return 10 * math.log10(signal_power(clean) / noise_power)
