"""Localization accuracy and uncertainty metrics."""

import math
from collections.abc import Sequence

import numpy as np
from scipy.stats import chi2

from wavelocate.core.errors import EmptyPrediction, InvalidParameter, LengthMismatch
from wavelocate.core.models import (
    AmbiguitySurface,
    Assignment,
    DamageSet,
    FloatArray,
    GmmPrediction,
    QueryGrid,
)
from wavelocate.mdn.mixture import mixture_log_likelihood, nll

CI95_THRESHOLD = float(chi2.ppf(0.95, df=2))  # 5.991


def assign_components(prediction: GmmPrediction, truth: DamageSet) -> Assignment:
    """Map every component to its nearest damage and select one component per damage.

    Per damage the selected component is the assigned one with the largest
    weight; a damage with no assigned component takes the nearest mean overall.
    Ties go to the lowest index.

    Raises:
        EmptyPrediction: If the prediction has no components.
    """
    if prediction.num_components == 0:
        raise EmptyPrediction("prediction has no components")
    if truth.count == 0:
        return Assignment(component_to_damage=(), selected=())

    distances = np.linalg.norm(
        prediction.means[:, np.newaxis, :] - truth.locations[np.newaxis, :, :], axis=-1
    )  # (k, K)
    nearest = np.argmin(distances, axis=1)
    selected = []
    for damage in range(truth.count):
        members = np.nonzero(nearest == damage)[0]
        if members.size:
            selected.append(int(members[np.argmax(prediction.weights[members])]))
        else:
            selected.append(int(np.argmin(distances[:, damage])))
    return Assignment(
        component_to_damage=tuple(int(j) for j in nearest), selected=tuple(selected)
    )


def _check_lengths(predictions: Sequence[GmmPrediction], truths: Sequence[DamageSet]) -> None:
    if len(predictions) != len(truths):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(truths)} truths")


def sample_errors(
    predictions: Sequence[GmmPrediction], truths: Sequence[DamageSet]
) -> FloatArray:
    """Per-sample mean distance between each damage and its selected component."""
    _check_lengths(predictions, truths)
    errors = np.zeros(len(truths))
    for i, (prediction, truth) in enumerate(zip(predictions, truths, strict=True)):
        if truth.count == 0:
            continue
        chosen = prediction.means[list(assign_components(prediction, truth).selected)]
        errors[i] = float(np.mean(np.linalg.norm(chosen - truth.locations, axis=1)))
    return errors


def ale(
    predictions: Sequence[GmmPrediction], truths: Sequence[DamageSet]
) -> tuple[float, FloatArray]:
    """Average localization error over samples and the per-sample errors.

    Raises:
        LengthMismatch: If the lists differ in length.
    """
    errors = sample_errors(predictions, truths)
    if errors.size == 0:
        return math.nan, errors
    return float(np.mean(errors)), errors


def ci95_coverage(predictions: Sequence[GmmPrediction], truths: Sequence[DamageSet]) -> float:
    """Fraction of damages inside the 95% ellipse of their selected component."""
    _check_lengths(predictions, truths)
    covered = 0
    total = 0
    for prediction, truth in zip(predictions, truths, strict=True):
        if truth.count == 0:
            continue
        selected = list(assign_components(prediction, truth).selected)
        diff = truth.locations - prediction.means[selected]
        var = prediction.variances[selected]
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.where(var > 0, diff**2 / var, np.where(diff == 0, 0.0, np.inf))
        covered += int(np.sum(scaled.sum(axis=1) <= CI95_THRESHOLD))
        total += truth.count
    return covered / total if total else math.nan


def uncertainty_summaries(
    predictions: Sequence[GmmPrediction], truths: Sequence[DamageSet]
) -> tuple[float, float]:
    """Largest predicted component variance and mean log-likelihood of the truths.

    Returns:
        (max_component_variance, mean_loglik); NaN for empty inputs.
    """
    _check_lengths(predictions, truths)
    if not predictions:
        return math.nan, math.nan
    max_var = max(float(p.variances.max(initial=0.0)) for p in predictions)
    logliks = [-nll(p, t) for p, t in zip(predictions, truths, strict=True) if t.count]
    return max_var, float(np.mean(logliks)) if logliks else math.nan


def random_baseline_ale(
    num_samples: int, length: float, width: float, rng: np.random.Generator
) -> float:
    """ALE of uniformly random single-point predictions against uniformly random truths."""
    if num_samples < 1:
        raise InvalidParameter("num_samples must be positive")
    scale = np.array([length, width])
    guesses = rng.uniform(0.0, 1.0, size=(num_samples, 2)) * scale
    truths = rng.uniform(0.0, 1.0, size=(num_samples, 2)) * scale
    predictions = [GmmPrediction.from_points(g) for g in guesses]
    value, _ = ale(predictions, [DamageSet(t[np.newaxis, :]) for t in truths])
    return value


def density_surface(prediction: GmmPrediction, grid: QueryGrid) -> AmbiguitySurface:
    """Mixture density rasterized on a query grid (integrates to ~1 with cell areas)."""
    if np.any(prediction.variances <= 0):
        raise InvalidParameter("density needs strictly positive component variances")
    density = np.exp(mixture_log_likelihood(prediction, grid.points))
    return AmbiguitySurface(density, grid)
