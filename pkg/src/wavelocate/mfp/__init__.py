"""Matched-field-processing baseline localizer."""

from wavelocate.mfp.matched_field import (
    MfpLocalizer,
    ModelBank,
    ambiguity,
    localize,
    model_spectrum,
)

__all__ = ["MfpLocalizer", "ModelBank", "ambiguity", "localize", "model_spectrum"]
