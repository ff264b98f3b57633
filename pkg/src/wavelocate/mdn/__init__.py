"""Mixture density network localizer."""

from wavelocate.mdn.mixture import activate, mixture_log_likelihood, nll
from wavelocate.mdn.network import backward, forward, init_params
from wavelocate.mdn.trainer import (
    MdnLocalizer,
    cross_validate,
    predict,
    predict_batch,
    train,
    train_with_cv,
)

__all__ = [
    "MdnLocalizer",
    "activate",
    "backward",
    "cross_validate",
    "forward",
    "init_params",
    "mixture_log_likelihood",
    "nll",
    "predict",
    "predict_batch",
    "train",
    "train_with_cv",
]
