"""Exception hierarchy for wavelocate.

Every error carries the process exit code the CLI reports for it.
"""


class WavelocateError(Exception):
    """Base class for all wavelocate errors."""

    exit_code = 1


class ConfigError(WavelocateError, ValueError):
    """Invalid configuration or parameters."""

    exit_code = 2


class InvalidMaterial(ConfigError):
    """Plate material constants out of range."""


class InvalidParameter(ConfigError):
    """A model or operation parameter is out of range."""


class InvalidDamageCount(ConfigError):
    """Requested number of damages is not supported."""


class DimensionMismatch(ConfigError):
    """Input dimensions disagree with a model or dataset."""


class NumericError(WavelocateError):
    """Numerical or solver failure."""

    exit_code = 3


class NoRootFound(NumericError):
    """Dispersion root bracketing or branch tracing failed."""


class DegenerateTable(NumericError):
    """Wavenumber is locally constant, so group velocity is undefined."""


class PathTooShort(NumericError):
    """Scatter path is shorter than the configured floor."""


class ZeroWavenumber(NumericError):
    """A nonzero frequency bin has zero wavenumber."""


class ZeroSignal(NumericError):
    """Signal power is zero but a finite SNR was requested."""


class NotConjugateSymmetric(NumericError):
    """Spectrum cannot come from a real time signal."""


class EmptyModel(NumericError):
    """MFP model spectra vanish at a grid point."""


class LengthMismatch(NumericError):
    """Paired inputs have different lengths."""


class NonFiniteActivation(NumericError):
    """Network activations became NaN or infinite."""


class NonFiniteGradient(NumericError):
    """Backpropagated gradients became NaN or infinite."""


class EmptyPrediction(NumericError):
    """A prediction has no components to assign."""


class StorageError(WavelocateError):
    """Artifact could not be read or written."""

    exit_code = 4


class DivergedTraining(WavelocateError):
    """Training loss became non-finite."""

    exit_code = 5
