"""Gaussian-mixture output layer: activation, likelihood and its gradient.

The raw output vector of length (2d+1)k is laid out as
[z_mu (k*d, component-major) ; z_sigma (k*d) ; z_pi (k)].
Means pass through, variances are exp(z_sigma) clamped to [floor, ceiling],
weights are softmax(z_pi).
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from wavelocate.core.errors import LengthMismatch
from wavelocate.core.models import (
    DamageSet,
    FloatArray,
    GmmPrediction,
    MultiTarget,
    NetworkSpec,
)

LOG_2PI = math.log(2 * math.pi)
DEFAULT_VARIANCE_FLOOR = 1e-6


@dataclass(eq=False)
class MixtureBatch:
    """Activated mixture parameters for a batch: means/variances (B, k, d), weights (B, k)."""

    means: FloatArray
    variances: FloatArray
    log_weights: FloatArray
    clamped: NDArray[np.bool_]

    @property
    def weights(self) -> FloatArray:
        return np.exp(self.log_weights)

    def prediction(self, index: int) -> GmmPrediction:
        weights = self.weights[index]
        return GmmPrediction(
            means=self.means[index].copy(),
            variances=self.variances[index].copy(),
            weights=weights / weights.sum(),
        )


def activate_batch(
    z: FloatArray,
    num_components: int,
    dims: int = 2,
    floor: float = DEFAULT_VARIANCE_FLOOR,
    ceiling: float = math.inf,
) -> MixtureBatch:
    """Map raw outputs (B, (2d+1)k) to mixture parameters.

    Variances outside [floor, ceiling] are clamped and flagged.
    """
    k, d = num_components, dims
    if z.shape[-1] != (2 * d + 1) * k:
        raise LengthMismatch(f"output vector has length {z.shape[-1]}, expected {(2 * d + 1) * k}")
    batch = z.shape[0]
    z_mu = z[:, : k * d].reshape(batch, k, d)
    z_sigma = z[:, k * d : 2 * k * d].reshape(batch, k, d)
    z_pi = z[:, 2 * k * d :]

    log_ceiling = math.log(ceiling)
    raw_var = np.exp(np.minimum(z_sigma, log_ceiling))
    low = raw_var < floor
    high = z_sigma > log_ceiling
    log_weights = z_pi - logsumexp(z_pi, axis=1, keepdims=True)
    return MixtureBatch(
        means=z_mu.copy(),
        variances=np.where(low, floor, np.where(high, ceiling, raw_var)),
        log_weights=log_weights,
        clamped=low | high,
    )


def activate(
    z: FloatArray,
    spec: NetworkSpec,
    floor: float = DEFAULT_VARIANCE_FLOOR,
    ceiling: float = math.inf,
) -> GmmPrediction:
    """Activate one raw output vector into a GmmPrediction.

    Raises:
        LengthMismatch: If z does not have length (2d+1)k.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] != spec.output_dim:
        raise LengthMismatch(f"output vector has shape {z.shape}, expected ({spec.output_dim},)")
    batch = activate_batch(z[np.newaxis, :], spec.num_components, spec.dims, floor, ceiling)
    return batch.prediction(0)


def component_log_densities(
    points: FloatArray, means: FloatArray, variances: FloatArray
) -> FloatArray:
    """log N(y; mu_i, diag var_i) for points (..., d) against components (k, d); shape (..., k)."""
    diff = points[..., np.newaxis, :] - means
    return -0.5 * np.sum(LOG_2PI + np.log(variances) + diff**2 / variances, axis=-1)


def mixture_log_likelihood(prediction: GmmPrediction, points: FloatArray) -> FloatArray:
    """log sum_i pi_i N(y; mu_i, Sigma_i) for each row of points (n, d)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    with np.errstate(divide="ignore"):
        log_weights = np.log(prediction.weights)
    log_terms = log_weights + component_log_densities(
        points, prediction.means, prediction.variances
    )
    return np.asarray(logsumexp(log_terms, axis=-1), dtype=np.float64)


def nll(
    prediction: GmmPrediction,
    truth: DamageSet,
    multi_target: MultiTarget = MultiTarget.AVERAGE,
) -> float:
    """Negative log-likelihood of a sample's damages under the mixture.

    With several damages the loss is averaged over them (or uses the first only).
    """
    locations = truth.locations
    if multi_target is MultiTarget.FIRST:
        locations = locations[:1]
    if locations.shape[0] == 0:
        return 0.0
    return float(-np.mean(mixture_log_likelihood(prediction, locations)))


def target_weights(counts: NDArray[np.int64], k_max: int, multi_target: MultiTarget) -> FloatArray:
    """Per-(sample, damage) loss weights (B, k_max); rows sum to 1 for non-empty samples."""
    slots = np.arange(k_max)[np.newaxis, :]
    if multi_target is MultiTarget.FIRST:
        valid = (slots == 0) & (counts[:, np.newaxis] > 0)
    else:
        valid = slots < counts[:, np.newaxis]
    used = np.maximum(valid.sum(axis=1, keepdims=True), 1)
    return valid / used


def nll_and_gradient(
    z: FloatArray,
    targets: FloatArray,
    counts: NDArray[np.int64],
    num_components: int,
    dims: int = 2,
    floor: float = DEFAULT_VARIANCE_FLOOR,
    multi_target: MultiTarget = MultiTarget.AVERAGE,
    ceiling: float = math.inf,
) -> tuple[float, FloatArray]:
    """Batch-mean NLL and its gradient with respect to the raw outputs.

    Args:
        z: Raw outputs (B, (2d+1)k).
        targets: True locations (B, k_max, d), NaN in unused slots.
        counts: Number of damages per sample (B,).
        num_components: Mixture size k.
        dims: Target dimension d.
        floor: Variance floor; clamped entries get zero variance gradient.
        multi_target: Loss for samples with several damages.
        ceiling: Variance ceiling, clamped like the floor.

    Returns:
        Mean loss and dL/dz with the same shape as z.
    """
    batch = z.shape[0]
    mix = activate_batch(z, num_components, dims, floor, ceiling)
    weights_j = target_weights(counts, targets.shape[1], multi_target)  # (B, J)
    y = np.where(np.isnan(targets), 0.0, targets)

    diff = y[:, :, np.newaxis, :] - mix.means[:, np.newaxis, :, :]  # (B, J, k, d)
    var = mix.variances[:, np.newaxis, :, :]
    log_density = -0.5 * np.sum(LOG_2PI + np.log(var) + diff**2 / var, axis=-1)
    log_terms = mix.log_weights[:, np.newaxis, :] + log_density  # (B, J, k)
    log_mix = logsumexp(log_terms, axis=-1)  # (B, J)
    loss = -float(np.sum(weights_j * log_mix)) / batch

    # responsibilities weighted by each target's share of its sample's loss
    resp = np.exp(log_terms - log_mix[..., np.newaxis]) * weights_j[..., np.newaxis]
    pi = mix.weights
    d_pi = -(resp.sum(axis=1) - weights_j.sum(axis=1, keepdims=True) * pi)
    d_mu = -np.sum(resp[..., np.newaxis] * diff / var, axis=1)
    d_sigma = -np.sum(resp[..., np.newaxis] * 0.5 * (diff**2 / var - 1.0), axis=1)
    d_sigma = np.where(mix.clamped, 0.0, d_sigma)

    grad = np.concatenate([d_mu.reshape(batch, -1), d_sigma.reshape(batch, -1), d_pi], axis=1)
    return loss, grad / batch


def target_centroid(targets: FloatArray) -> FloatArray:
    """Mean of every non-padded target location (origin when there are none)."""
    points = targets.reshape(-1, targets.shape[-1])
    points = points[~np.isnan(points).any(axis=1)]
    if points.shape[0] == 0:
        return np.zeros(targets.shape[-1])
    return np.asarray(points.mean(axis=0), dtype=np.float64)


def output_penalty(
    z: FloatArray,
    num_components: int,
    dims: int,
    anchor: FloatArray,
    variance_weight: float,
    mean_weight: float,
    floor: float = DEFAULT_VARIANCE_FLOOR,
) -> tuple[float, FloatArray]:
    """Batch-mean prior on the component parameters and its gradient.

    The penalty is variance_weight * sum(var) + mean_weight * sum(|mu - anchor|^2)
    over components and axes. Variances are floored but not capped, so a
    component above the ceiling is still pulled back down.

    Args:
        z: Raw outputs (B, (2d+1)k).
        num_components: Mixture size k.
        dims: Target dimension d.
        anchor: Location (d,) the means are drawn towards.
        variance_weight: Weight of the variance term (1/m^2).
        mean_weight: Weight of the mean term (1/m^2).
        floor: Variance floor; floored entries get zero gradient.

    Returns:
        Mean penalty and its gradient with the same shape as z.
    """
    batch = z.shape[0]
    k, d = num_components, dims
    offset = z[:, : k * d].reshape(batch, k, d) - anchor
    var = np.exp(z[:, k * d : 2 * k * d])
    floored = var < floor
    value = variance_weight * float(np.sum(np.where(floored, floor, var)))
    value += mean_weight * float(np.sum(offset**2))

    grad = np.zeros_like(z)
    grad[:, : k * d] = 2.0 * mean_weight * offset.reshape(batch, -1)
    grad[:, k * d : 2 * k * d] = np.where(floored, 0.0, variance_weight * var)
    return value / batch, grad / batch
