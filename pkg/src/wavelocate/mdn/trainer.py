"""Mini-batch Adam training, dropout selection by cross-validation, and inference."""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from numpy.typing import NDArray
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
)

from wavelocate.core.errors import (
    DimensionMismatch,
    DivergedTraining,
    InvalidParameter,
    NonFiniteActivation,
    NonFiniteGradient,
)
from wavelocate.core.interfaces import Localizer
from wavelocate.core.logs import stderr_console
from wavelocate.core.models import (
    Dataset,
    FloatArray,
    GmmPrediction,
    LrSchedule,
    ModelArtifact,
    NetworkSpec,
    TrainConfig,
)
from wavelocate.mdn.mixture import (
    activate,
    activate_batch,
    nll_and_gradient,
    output_penalty,
    target_centroid,
)
from wavelocate.mdn.network import backward, forward, init_params

logger = logging.getLogger(__name__)

STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_DROPOUT = 2
STREAM_FOLDS = 3
CV_FOLDS = 3
EVAL_BATCH = 256
MIN_LR_FRACTION = 0.05


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 0x6D646E, stream]))


@dataclass(eq=False)
class TrainingData:
    """Standardized inputs with NaN-padded targets and damage counts."""

    x: FloatArray
    targets: FloatArray
    counts: NDArray[np.int64]

    @classmethod
    def from_split(cls, dataset: Dataset, split: str) -> "TrainingData":
        targets, counts = dataset.targets(split)
        return cls(dataset.features(split), targets, counts)

    @property
    def size(self) -> int:
        return int(self.x.shape[0])

    def subset(self, index: NDArray[np.intp]) -> "TrainingData":
        return TrainingData(self.x[index], self.targets[index], self.counts[index])


class Adam:
    """Adam optimizer with bias correction, updating parameters in place."""

    def __init__(self, params: list[FloatArray], config: TrainConfig) -> None:
        self._config = config
        self.learning_rate = config.learning_rate
        self._m = [np.zeros_like(p) for p in params]
        self._v = [np.zeros_like(p) for p in params]
        self.steps = 0

    def step(self, params: list[FloatArray], grads: list[FloatArray]) -> None:
        cfg = self._config
        self.steps += 1
        correction1 = 1 - cfg.beta1**self.steps
        correction2 = 1 - cfg.beta2**self.steps
        for p, g, m, v in zip(params, grads, self._m, self._v, strict=True):
            m *= cfg.beta1
            m += (1 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1 - cfg.beta2) * g * g
            p -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + cfg.epsilon)


def clip_gradients(grads: list[FloatArray], max_norm: float) -> float:
    """Rescale gradients in place to a global norm of at most max_norm (0 disables).

    Returns:
        The global norm before clipping.
    """
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return norm


def learning_rate_at(config: TrainConfig, epoch: int) -> float:
    """Learning rate for a 1-based epoch.

    The cosine schedule starts at the configured rate and ends at
    MIN_LR_FRACTION of it on the last epoch.
    """
    if config.lr_schedule is LrSchedule.CONSTANT or config.epochs <= 1:
        return config.learning_rate
    progress = (epoch - 1) / (config.epochs - 1)
    scale = MIN_LR_FRACTION + (1 - MIN_LR_FRACTION) * 0.5 * (1 + math.cos(math.pi * progress))
    return config.learning_rate * scale


def _objective(
    params: list[FloatArray],
    spec: NetworkSpec,
    data: TrainingData,
    config: TrainConfig,
    rng: np.random.Generator | None,
    anchor: FloatArray | None,
) -> tuple[float, float, list[FloatArray]]:
    z, cache = forward(data.x, params, spec, rng)
    loss, grad_z = nll_and_gradient(
        z,
        data.targets,
        data.counts,
        spec.num_components,
        spec.dims,
        config.variance_floor,
        config.multi_target,
        ceiling=config.variance_ceiling,
    )
    penalty = 0.0
    if config.variance_penalty > 0 or config.mean_penalty > 0:
        if anchor is None:
            anchor = target_centroid(data.targets)
        penalty, grad_penalty = output_penalty(
            z,
            spec.num_components,
            spec.dims,
            anchor,
            config.variance_penalty,
            config.mean_penalty,
            config.variance_floor,
        )
        grad_z = grad_z + grad_penalty
    return loss, penalty, backward(params, cache, grad_z)


def loss_and_gradients(
    params: list[FloatArray],
    spec: NetworkSpec,
    data: TrainingData,
    config: TrainConfig,
    rng: np.random.Generator | None = None,
    anchor: FloatArray | None = None,
) -> tuple[float, list[FloatArray]]:
    """Batch-mean training objective and its parameter gradients.

    The objective is the NLL plus the output penalty; the penalty's means are
    drawn towards `anchor`, by default the batch's target centroid. Train mode
    (dropout) applies when rng is given.
    """
    loss, penalty, grads = _objective(params, spec, data, config, rng, anchor)
    return loss + penalty, grads


def evaluate_nll(
    params: list[FloatArray], spec: NetworkSpec, data: TrainingData, config: TrainConfig
) -> float:
    """Mean NLL in inference mode."""
    if data.size == 0:
        return math.nan
    total = 0.0
    for start in range(0, data.size, EVAL_BATCH):
        chunk = data.subset(np.arange(start, min(start + EVAL_BATCH, data.size)))
        z, _ = forward(chunk.x, params, spec)
        loss, _ = nll_and_gradient(
            z,
            chunk.targets,
            chunk.counts,
            spec.num_components,
            spec.dims,
            config.variance_floor,
            config.multi_target,
            ceiling=config.variance_ceiling,
        )
        total += loss * chunk.size
    return total / data.size


def _held_out_nll(
    params: list[FloatArray],
    spec: NetworkSpec,
    data: TrainingData,
    config: TrainConfig,
    where: str,
) -> float:
    """evaluate_nll with non-finite results reported as divergence."""
    try:
        value = evaluate_nll(params, spec, data, config)
    except NonFiniteActivation as e:
        raise DivergedTraining(f"{where}: {e}") from e
    if not math.isfinite(value):
        raise DivergedTraining(f"{where}: validation loss became {value}")
    return value


def fit(
    data: TrainingData,
    spec: NetworkSpec,
    config: TrainConfig,
    validation: TrainingData | None = None,
    *,
    quiet: bool = True,
    label: str = "Training",
) -> tuple[list[FloatArray], list[dict[str, Any]]]:
    """Train from a fresh seeded initialization.

    With validation data and `config.restore_best`, the parameters of the
    epoch with the lowest validation NLL are returned instead of the last.

    Args:
        data: Training inputs and targets.
        spec: Network architecture (its dropout is used in train mode).
        config: Optimizer and loop settings.
        validation: Optional held-out data scored after every epoch.
        quiet: Suppress the progress bar.
        label: Progress bar description.

    Returns:
        Selected parameters and the per-epoch log.

    Raises:
        DivergedTraining: If the loss, the validation loss or any gradient
            becomes non-finite.
    """
    if data.size == 0:
        raise InvalidParameter("training split is empty")
    params = init_params(spec, _rng(config.seed, STREAM_INIT))
    shuffle_rng = _rng(config.seed, STREAM_SHUFFLE)
    dropout_rng = _rng(config.seed, STREAM_DROPOUT)
    optimizer = Adam(params, config)
    anchor = target_centroid(data.targets)
    history: list[dict[str, Any]] = []
    best: tuple[float, int, list[FloatArray]] | None = None

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        TimeElapsedColumn(),
        console=stderr_console,
        transient=True,
        disable=quiet,
    ) as progress:
        task = progress.add_task(f"[green]{label}...", total=config.epochs)
        for epoch in range(1, config.epochs + 1):
            optimizer.learning_rate = learning_rate_at(config, epoch)
            order = shuffle_rng.permutation(data.size)
            total = 0.0
            for start in range(0, data.size, config.batch_size):
                batch = data.subset(order[start : start + config.batch_size])
                try:
                    loss, penalty, grads = _objective(
                        params, spec, batch, config, dropout_rng, anchor
                    )
                except (NonFiniteActivation, NonFiniteGradient) as e:
                    raise DivergedTraining(f"epoch {epoch}: {e}") from e
                if not math.isfinite(loss + penalty):
                    raise DivergedTraining(
                        f"epoch {epoch}: training loss became {loss + penalty}"
                    )
                clip_gradients(grads, config.clip_norm)
                optimizer.step(params, grads)
                total += loss * batch.size

            entry: dict[str, Any] = {"epoch": epoch, "train_nll": total / data.size}
            if validation is not None and validation.size:
                val_nll = _held_out_nll(params, spec, validation, config, f"epoch {epoch}")
                entry["val_nll"] = val_nll
                if config.restore_best and (best is None or val_nll < best[0]):
                    best = (val_nll, epoch, [p.copy() for p in params])
            else:
                entry["val_nll"] = None
            history.append(entry)
            logger.debug("epoch %d: train %.4f val %s", epoch, entry["train_nll"], entry["val_nll"])
            progress.advance(task)

    if best is not None and best[1] != config.epochs:
        logger.info("restoring epoch %d (validation NLL %.4f)", best[1], best[0])
        params = best[2]
    return params, history


def train(
    dataset: Dataset, spec: NetworkSpec, config: TrainConfig, *, quiet: bool = True
) -> ModelArtifact:
    """Train on the train split, monitoring the val split.

    Raises:
        DimensionMismatch: If spec.input_dim differs from the dataset's input size.
    """
    expected = dataset.scenario.input_dim
    if spec.input_dim != expected:
        raise DimensionMismatch(
            f"network expects {spec.input_dim} input features, dataset provides {expected}"
        )
    params, history = fit(
        TrainingData.from_split(dataset, "train"),
        spec,
        config,
        TrainingData.from_split(dataset, "val"),
        quiet=quiet,
    )
    if history:
        final = history[-1]["train_nll"]
        logger.info("trained %d epochs: final train NLL %.4f", len(history), final)
    return ModelArtifact(spec, config, dataset.standardization, params, history)


def cross_validate(
    dataset: Dataset, spec: NetworkSpec, config: TrainConfig, *, quiet: bool = True
) -> tuple[float, list[dict[str, Any]]]:
    """Pick the dropout with the lowest mean validation NLL over three folds.

    Returns:
        The selected dropout and one log entry per fold.
    """
    data = TrainingData.from_split(dataset, "train")
    if data.size < CV_FOLDS:
        raise InvalidParameter(f"cross-validation needs at least {CV_FOLDS} training samples")
    candidates = config.cv_dropouts or (spec.dropout,)
    folds = np.array_split(_rng(config.seed, STREAM_FOLDS).permutation(data.size), CV_FOLDS)

    scores = np.zeros((CV_FOLDS, len(candidates)))
    for f, held_out in enumerate(folds):
        kept = np.concatenate([fold for g, fold in enumerate(folds) if g != f])
        for c, rate in enumerate(candidates):
            params, _ = fit(
                data.subset(kept),
                replace(spec, dropout=rate),
                config,
                quiet=quiet,
                label=f"Fold {f + 1}/{CV_FOLDS}, dropout {rate:g}",
            )
            scores[f, c] = _held_out_nll(
                params, spec, data.subset(held_out), config, f"fold {f + 1}"
            )

    best = float(candidates[int(np.argmin(scores.mean(axis=0)))])
    log = [
        {
            "fold": f + 1,
            "val_nll": {f"{rate:g}": float(scores[f, c]) for c, rate in enumerate(candidates)},
            "selected_dropout": best,
        }
        for f in range(CV_FOLDS)
    ]
    logger.info("cross-validation selected dropout %g", best)
    return best, log


def train_with_cv(
    dataset: Dataset, spec: NetworkSpec, config: TrainConfig, *, quiet: bool = True
) -> ModelArtifact:
    """Select dropout by 3-fold cross-validation, then retrain on the full train split."""
    best, log = cross_validate(dataset, spec, config, quiet=quiet)
    artifact = train(dataset, replace(spec, dropout=best), config, quiet=quiet)
    artifact.cv = log
    return artifact


def predict(model: ModelArtifact, signals: FloatArray) -> GmmPrediction:
    """Mixture prediction for one raw (unstandardized) signal matrix.

    Raises:
        DimensionMismatch: If the signal size differs from the model's input size.
    """
    x = model.standardization.apply(np.asarray(signals, dtype=np.float64).reshape(-1))
    z, _ = forward(x, model.params, model.spec)
    config = model.config
    return activate(z[0], model.spec, config.variance_floor, config.variance_ceiling)


def predict_batch(model: ModelArtifact, raw: FloatArray) -> list[GmmPrediction]:
    """Mixture predictions for raw signals (N, ...)."""
    count = raw.shape[0]
    if count == 0:
        return []
    x = model.standardization.apply(raw.reshape(count, -1))
    predictions: list[GmmPrediction] = []
    for start in range(0, count, EVAL_BATCH):
        z, _ = forward(x[start : start + EVAL_BATCH], model.params, model.spec)
        mix = activate_batch(
            z,
            model.spec.num_components,
            model.spec.dims,
            model.config.variance_floor,
            model.config.variance_ceiling,
        )
        predictions.extend(mix.prediction(i) for i in range(z.shape[0]))
    return predictions


class MdnLocalizer(Localizer):
    """Trained mixture density network evaluated on dataset splits."""

    def __init__(self, model: ModelArtifact) -> None:
        self.model = model

    @property
    def name(self) -> str:
        return "mdn"

    @property
    def reports_uncertainty(self) -> bool:
        return True

    def predict_split(self, dataset: Dataset, split: str) -> list[GmmPrediction]:
        return predict_batch(self.model, dataset.raw_signals(split))
