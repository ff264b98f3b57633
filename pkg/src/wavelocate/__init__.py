"""
wavelocate - Uncertainty-aware guided-wave damage localization.

Synthesizes multistatic Lamb-wave scatter data for a plate under
wavenumber distortion and sensor noise, then localizes damage with a
matched-field-processing baseline and a mixture density network that
reports a Gaussian mixture over damage positions.

Usage:
    wavelocate dispersion --config run.toml --out dispersion.csv
    wavelocate simulate --config run.toml --seed 7 --out data/
    wavelocate train data/ --config run.toml --out model/
    wavelocate eval --model model/ --dataset data/ --out report/
"""

__version__ = "0.1.0"

from wavelocate.core.config import RunConfig
from wavelocate.core.errors import WavelocateError
from wavelocate.core.models import (
    DamageSet,
    Dataset,
    GmmPrediction,
    MetricReport,
    ModelArtifact,
    ScenarioConfig,
)

__all__ = [
    "__version__",
    "DamageSet",
    "Dataset",
    "GmmPrediction",
    "MetricReport",
    "ModelArtifact",
    "RunConfig",
    "ScenarioConfig",
    "WavelocateError",
]
