"""Data models for wavelocate."""

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import NDArray

from wavelocate.core.errors import (
    DimensionMismatch,
    InvalidDamageCount,
    InvalidMaterial,
    InvalidParameter,
    LengthMismatch,
)

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

DATASET_FORMAT = "wavelocate-ds/1"
MODEL_FORMAT = "wavelocate-model/1"
REPORT_FORMAT = "wavelocate-report/1"

SPLITS = ("train", "val", "test")
MAX_QUADRANT_DAMAGES = 4


def encode_float(value: float) -> float | str | None:
    """Encode a float for strict JSON (infinities as strings, NaN as null)."""
    if math.isnan(value):
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def decode_float(value: float | str | None) -> float:
    """Inverse of encode_float."""
    if value is None:
        return math.nan
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinite", "+inf"):
            return math.inf
        if text == "-inf":
            return -math.inf
        return float(text)
    return float(value)


def quadrant_of(x: float, y: float, length: float, width: float) -> int:
    """Quadrant index of a point: 0 lower-left, 1 lower-right, 2 upper-left, 3 upper-right."""
    return int(x >= length / 2) + 2 * int(y >= width / 2)


class Mode(Enum):
    """Zeroth-order Lamb modes."""

    S0 = "S0"
    A0 = "A0"


class DamagePolicyKind(Enum):
    """How many damages a generated sample carries."""

    FIXED = "fixed"
    UP_TO = "up_to"


class ExcitationKind(Enum):
    """Spectral shape applied to synthesized and model spectra."""

    IMPULSE = "impulse"
    GAUSSIAN = "gaussian"


class MultiTarget(Enum):
    """Training loss for samples with several damages."""

    AVERAGE = "average"
    FIRST = "first"


class LrSchedule(Enum):
    """Per-epoch learning-rate schedule."""

    CONSTANT = "constant"
    COSINE = "cosine"


class Method(Enum):
    """Localization methods compared by the evaluation harness."""

    MDN = "mdn"
    MFP = "mfp"


@dataclass(frozen=True)
class PlateMaterial:
    """Isotropic plate material (SI units)."""

    youngs_modulus: float = 69e9
    poisson_ratio: float = 0.33
    density: float = 2700.0
    thickness: float = 0.003

    def __post_init__(self) -> None:
        for name in ("youngs_modulus", "density", "thickness"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidMaterial(f"plate.{name} must be positive, got {value}")
        if not 0 < self.poisson_ratio < 0.5:
            raise InvalidMaterial(
                f"plate.poisson_ratio must be in (0, 0.5), got {self.poisson_ratio}"
            )

    @property
    def shear_velocity(self) -> float:
        shear_modulus = self.youngs_modulus / (2 * (1 + self.poisson_ratio))
        return math.sqrt(shear_modulus / self.density)

    @property
    def longitudinal_velocity(self) -> float:
        nu = self.poisson_ratio
        modulus = self.youngs_modulus * (1 - nu) / ((1 + nu) * (1 - 2 * nu))
        return math.sqrt(modulus / self.density)

    @property
    def plate_velocity(self) -> float:
        """Low-frequency limit of the S0 phase velocity."""
        return math.sqrt(self.youngs_modulus / (self.density * (1 - self.poisson_ratio**2)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "youngs_modulus": self.youngs_modulus,
            "poisson_ratio": self.poisson_ratio,
            "density": self.density,
            "thickness": self.thickness,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PlateMaterial":
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True)
class FrequencyGrid:
    """Equally spaced DFT frequency grid: f_q = f_min + q (f_max - f_min) / Q."""

    num_points: int = 256
    f_min: float = -500e3
    f_max: float = 500e3

    def __post_init__(self) -> None:
        if self.num_points < 2:
            raise InvalidParameter(f"frequencies.num_points must be >= 2, got {self.num_points}")
        if not self.f_max > self.f_min:
            raise InvalidParameter(
                f"frequencies.f_max ({self.f_max}) must exceed f_min ({self.f_min})"
            )

    @property
    def spacing(self) -> float:
        return (self.f_max - self.f_min) / self.num_points

    @property
    def is_symmetric(self) -> bool:
        """True when the grid is the fftshifted grid of a real time signal."""
        return self.num_points % 2 == 0 and self.f_min == -self.f_max

    @property
    def frequencies(self) -> FloatArray:
        """Bin frequencies in Hz, ascending."""
        if self.is_symmetric:
            # Integer offsets keep the zero bin and the +/- pairs exact.
            return (np.arange(self.num_points) - self.num_points // 2) * self.spacing
        return self.f_min + np.arange(self.num_points) * self.spacing

    @property
    def omega(self) -> FloatArray:
        return 2 * np.pi * self.frequencies

    @property
    def sampling_interval(self) -> float:
        return 1.0 / (self.f_max - self.f_min)

    @property
    def times(self) -> FloatArray:
        return np.arange(self.num_points) * self.sampling_interval

    def to_dict(self) -> dict[str, Any]:
        return {"num_points": self.num_points, "f_min": self.f_min, "f_max": self.f_max}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FrequencyGrid":
        return cls(
            num_points=int(data["num_points"]),
            f_min=float(data["f_min"]),
            f_max=float(data["f_max"]),
        )


@dataclass(frozen=True, eq=False)
class DispersionTable:
    """Per-mode wavenumbers kappa_n(omega_q) in rad/m, shape (modes, Q)."""

    grid: FrequencyGrid
    mode_names: tuple[str, ...]
    kappa: FloatArray

    def __post_init__(self) -> None:
        if self.kappa.shape != (len(self.mode_names), self.grid.num_points):
            raise DimensionMismatch(
                f"kappa shape {self.kappa.shape} does not match "
                f"{len(self.mode_names)} modes x {self.grid.num_points} bins"
            )

    @property
    def omega(self) -> FloatArray:
        return self.grid.omega

    @property
    def num_modes(self) -> int:
        return len(self.mode_names)

    def mode_index(self, mode: str | Mode) -> int:
        name = mode.value if isinstance(mode, Mode) else mode
        try:
            return self.mode_names.index(name)
        except ValueError:
            raise InvalidParameter(
                f"mode {name!r} not in table (available: {', '.join(self.mode_names)})"
            ) from None

    def scaled(self, alpha: float) -> "DispersionTable":
        """Table with every wavenumber multiplied by alpha."""
        return DispersionTable(self.grid, self.mode_names, self.kappa * alpha)


@dataclass(frozen=True)
class DispersionSpec:
    """Which dispersion model to build and its parameters."""

    model: str = "rayleigh_lamb"
    modes: tuple[str, ...] = ("S0", "A0")
    wave_speed: float = 5000.0
    power_a: float = 1.0
    power_b: float = 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "modes": list(self.modes),
            "wave_speed": self.wave_speed,
            "power_a": self.power_a,
            "power_b": self.power_b,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DispersionSpec":
        return cls(
            model=str(data["model"]),
            modes=tuple(data["modes"]),
            wave_speed=float(data["wave_speed"]),
            power_a=float(data["power_a"]),
            power_b=float(data["power_b"]),
        )


@dataclass(frozen=True, eq=False)
class SensorArray:
    """Sensor positions (m, 2) and their unordered transmitter-receiver pairs."""

    positions: FloatArray

    def __post_init__(self) -> None:
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise InvalidParameter(f"sensor positions must be (m, 2), got {self.positions.shape}")
        if self.positions.shape[0] < 2:
            raise InvalidParameter("at least two sensors are required")

    @classmethod
    def random(
        cls, count: int, length: float, width: float, rng: np.random.Generator
    ) -> "SensorArray":
        """Draw sensor positions uniformly over the plate."""
        positions = rng.uniform(0.0, 1.0, size=(count, 2)) * np.array([length, width])
        return cls(positions)

    @property
    def count(self) -> int:
        return int(self.positions.shape[0])

    @property
    def pair_index(self) -> list[tuple[int, int]]:
        """Lexicographically sorted pairs (i, j) with i < j."""
        return list(itertools.combinations(range(self.count), 2))

    @property
    def num_pairs(self) -> int:
        return self.count * (self.count - 1) // 2

    @property
    def transmitters(self) -> FloatArray:
        return self.positions[[i for i, _ in self.pair_index]]

    @property
    def receivers(self) -> FloatArray:
        return self.positions[[j for _, j in self.pair_index]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "positions": self.positions.tolist(),
            "pairs": [list(pair) for pair in self.pair_index],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SensorArray":
        return cls(np.asarray(data["positions"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class DamageSet:
    """Damage locations (K, 2) in meters."""

    locations: FloatArray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self) -> None:
        if self.locations.ndim != 2 or self.locations.shape[1] != 2:
            raise InvalidParameter(f"damage locations must be (K, 2), got {self.locations.shape}")

    @property
    def count(self) -> int:
        return int(self.locations.shape[0])

    def padded(self, k_max: int) -> FloatArray:
        """Flattened 2*k_max coordinates with NaN in unused slots."""
        if self.count > k_max:
            raise InvalidDamageCount(f"{self.count} damages exceed k_max={k_max}")
        out = np.full(2 * k_max, np.nan)
        out[: 2 * self.count] = self.locations.ravel()
        return out

    @classmethod
    def from_padded(cls, coords: FloatArray, count: int) -> "DamageSet":
        return cls(np.asarray(coords[: 2 * count], dtype=np.float64).reshape(count, 2))


@dataclass(frozen=True)
class DamagePolicy:
    """Fixed damage count or uniformly 1..count per sample."""

    kind: DamagePolicyKind = DamagePolicyKind.FIXED
    count: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.count <= MAX_QUADRANT_DAMAGES:
            raise InvalidDamageCount(
                f"uncertainty.num_damages must be in 1..{MAX_QUADRANT_DAMAGES}, got {self.count}"
            )

    @property
    def k_max(self) -> int:
        return self.count

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "count": self.count}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DamagePolicy":
        return cls(kind=DamagePolicyKind(data["kind"]), count=int(data["count"]))


@dataclass(frozen=True)
class Excitation:
    """Spectral excitation weights; impulse is flat."""

    kind: ExcitationKind = ExcitationKind.IMPULSE
    center_frequency: float = 100e3
    bandwidth: float = 50e3

    def __post_init__(self) -> None:
        if self.kind is ExcitationKind.GAUSSIAN and not self.bandwidth > 0:
            raise InvalidParameter(f"frequencies.bandwidth must be positive, got {self.bandwidth}")

    def weights(self, frequencies: FloatArray) -> FloatArray:
        if self.kind is ExcitationKind.IMPULSE:
            return np.ones_like(frequencies, dtype=np.float64)
        offset = np.abs(frequencies) - self.center_frequency
        return np.exp(-(offset**2) / (2 * self.bandwidth**2))

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "center_frequency": self.center_frequency,
            "bandwidth": self.bandwidth,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Excitation":
        return cls(
            kind=ExcitationKind(data["kind"]),
            center_frequency=float(data["center_frequency"]),
            bandwidth=float(data["bandwidth"]),
        )


@dataclass(frozen=True)
class UncertaintySpec:
    """Wavenumber distortion half-width, sensor SNR and their seeds."""

    w_distort: float = 0.0
    snr_db: float = math.inf
    noise_seed: int | None = None
    distortion_seed: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.w_distort < 1:
            raise InvalidParameter(
                f"uncertainty.w_distort must be in [0, 1), got {self.w_distort}"
            )
        if math.isnan(self.snr_db):
            raise InvalidParameter("uncertainty.snr_db must be a number or 'inf'")

    @property
    def alpha_bounds(self) -> tuple[float, float]:
        return (1.0 - self.w_distort, 1.0 + self.w_distort)

    def to_dict(self) -> dict[str, Any]:
        return {
            "w_distort": self.w_distort,
            "snr_db": encode_float(self.snr_db),
            "noise_seed": self.noise_seed,
            "distortion_seed": self.distortion_seed,
            "alpha_bounds": list(self.alpha_bounds),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "UncertaintySpec":
        return cls(
            w_distort=float(data["w_distort"]),
            snr_db=decode_float(data["snr_db"]),
            noise_seed=data.get("noise_seed"),
            distortion_seed=data.get("distortion_seed"),
        )


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Everything needed to synthesize a dataset."""

    sensors: SensorArray
    length: float = 1.0
    width: float = 1.0
    material: PlateMaterial = field(default_factory=PlateMaterial)
    dispersion: DispersionSpec = field(default_factory=DispersionSpec)
    grid: FrequencyGrid = field(default_factory=FrequencyGrid)
    uncertainty: UncertaintySpec = field(default_factory=UncertaintySpec)
    damage_policy: DamagePolicy = field(default_factory=DamagePolicy)
    excitation: Excitation = field(default_factory=Excitation)
    r_floor: float = 1e-3

    def __post_init__(self) -> None:
        if not (self.length > 0 and self.width > 0):
            raise InvalidParameter("plate.length and plate.width must be positive")
        pos = self.sensors.positions
        inside = (
            (pos[:, 0] >= 0)
            & (pos[:, 0] <= self.length)
            & (pos[:, 1] >= 0)
            & (pos[:, 1] <= self.width)
        )
        if not inside.all():
            raise InvalidParameter("sensors.positions must lie inside the plate")
        if not self.r_floor > 0:
            raise InvalidParameter(f"uncertainty.r_floor must be positive, got {self.r_floor}")

    @property
    def signal_shape(self) -> tuple[int, int]:
        return (self.sensors.num_pairs, self.grid.num_points)

    @property
    def input_dim(self) -> int:
        pairs, bins = self.signal_shape
        return pairs * bins

    def to_dict(self) -> dict[str, Any]:
        return {
            "length": self.length,
            "width": self.width,
            "material": self.material.to_dict(),
            "dispersion": self.dispersion.to_dict(),
            "grid": self.grid.to_dict(),
            "sensors": self.sensors.to_dict(),
            "uncertainty": self.uncertainty.to_dict(),
            "damage_policy": self.damage_policy.to_dict(),
            "excitation": self.excitation.to_dict(),
            "r_floor": self.r_floor,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        return cls(
            sensors=SensorArray.from_dict(data["sensors"]),
            length=float(data["length"]),
            width=float(data["width"]),
            material=PlateMaterial.from_dict(data["material"]),
            dispersion=DispersionSpec.from_dict(data["dispersion"]),
            grid=FrequencyGrid.from_dict(data["grid"]),
            uncertainty=UncertaintySpec.from_dict(data["uncertainty"]),
            damage_policy=DamagePolicy.from_dict(data["damage_policy"]),
            excitation=Excitation.from_dict(data["excitation"]),
            r_floor=float(data["r_floor"]),
        )


@dataclass(eq=False)
class Sample:
    """One multistatic measurement: standardized (M, Q_t) signals plus ground truth."""

    signals: FloatArray
    truth: DamageSet
    alpha_used: float = 1.0
    snr_used: float = math.inf


@dataclass(eq=False)
class Standardization:
    """Per-feature mean and standard deviation from the training split."""

    mean: FloatArray
    std: FloatArray

    @classmethod
    def fit(cls, features: FloatArray) -> "Standardization":
        """Fit on (N, D) features; zero-variance features keep unit scale."""
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        std[std == 0] = 1.0
        return cls(mean=mean, std=std)

    @classmethod
    def identity(cls, dim: int) -> "Standardization":
        return cls(mean=np.zeros(dim), std=np.ones(dim))

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def apply(self, features: FloatArray) -> FloatArray:
        if features.shape[-1] != self.dim:
            raise DimensionMismatch(
                f"expected {self.dim} input features, found {features.shape[-1]}"
            )
        return (features - self.mean) / self.std

    def invert(self, features: FloatArray) -> FloatArray:
        return features * self.std + self.mean

    def to_dict(self) -> dict[str, Any]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Standardization":
        return cls(
            mean=np.asarray(data["mean"], dtype=np.float64),
            std=np.asarray(data["std"], dtype=np.float64),
        )


@dataclass(eq=False)
class Dataset:
    """Standardized train/val/test splits generated from one scenario."""

    scenario: ScenarioConfig
    splits: dict[str, list[Sample]]
    standardization: Standardization
    master_seed: int

    def samples(self, split: str) -> list[Sample]:
        if split not in SPLITS:
            raise InvalidParameter(f"unknown split {split!r}")
        return self.splits.get(split, [])

    @property
    def counts(self) -> dict[str, int]:
        return {split: len(self.samples(split)) for split in SPLITS}

    @property
    def k_max(self) -> int:
        return self.scenario.damage_policy.k_max

    def features(self, split: str) -> FloatArray:
        """Standardized inputs, shape (N, M * Q_t)."""
        samples = self.samples(split)
        if not samples:
            return np.zeros((0, self.scenario.input_dim))
        return np.stack([s.signals.ravel() for s in samples])

    def raw_signals(self, split: str) -> FloatArray:
        """Unstandardized time signals, shape (N, M, Q_t)."""
        raw = self.standardization.invert(self.features(split))
        return raw.reshape((-1, *self.scenario.signal_shape))

    def targets(self, split: str) -> tuple[FloatArray, NDArray[np.int64]]:
        """Truth coordinates (N, k_max, 2) with NaN padding, and counts (N,)."""
        samples = self.samples(split)
        coords = np.full((len(samples), self.k_max, 2), np.nan)
        counts = np.zeros(len(samples), dtype=np.int64)
        for i, sample in enumerate(samples):
            counts[i] = sample.truth.count
            coords[i, : sample.truth.count] = sample.truth.locations
        return coords, counts

    def truths(self, split: str) -> list[DamageSet]:
        return [s.truth for s in self.samples(split)]


@dataclass(frozen=True)
class QueryGrid:
    """MFP query grid over [0, L] x [0, W], points in row-major order (x fastest)."""

    length: float = 1.0
    width: float = 1.0
    nx: int = 50
    ny: int = 50

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise InvalidParameter(f"mfp grid needs nx, ny >= 2, got {self.nx}x{self.ny}")
        if not (self.length > 0 and self.width > 0):
            raise InvalidParameter("mfp grid dimensions must be positive")

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def xs(self) -> FloatArray:
        return np.linspace(0.0, self.length, self.nx)

    @property
    def ys(self) -> FloatArray:
        return np.linspace(0.0, self.width, self.ny)

    @property
    def points(self) -> FloatArray:
        xx, yy = np.meshgrid(self.xs, self.ys)
        return np.column_stack([xx.ravel(), yy.ravel()])

    def point(self, index: int) -> tuple[float, float]:
        iy, ix = divmod(index, self.nx)
        return (float(self.xs[ix]), float(self.ys[iy]))

    @property
    def cell_area(self) -> float:
        return (self.length / (self.nx - 1)) * (self.width / (self.ny - 1))

    @property
    def diagonal_step(self) -> float:
        return math.hypot(self.length / (self.nx - 1), self.width / (self.ny - 1))

    def quadrants(self) -> NDArray[np.int64]:
        """Quadrant index of every grid point."""
        pts = self.points
        right = (pts[:, 0] >= self.length / 2).astype(np.int64)
        upper = (pts[:, 1] >= self.width / 2).astype(np.int64)
        return right + 2 * upper

    def to_dict(self) -> dict[str, Any]:
        return {"length": self.length, "width": self.width, "nx": self.nx, "ny": self.ny}


@dataclass(eq=False)
class AmbiguitySurface:
    """Non-negative field over a query grid (MFP correlation or mixture density)."""

    values: FloatArray
    grid: QueryGrid

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.size,):
            raise DimensionMismatch(
                f"surface has {self.values.shape} values for a {self.grid.nx}x{self.grid.ny} grid"
            )
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise InvalidParameter("surface values must be finite and non-negative")

    def as_image(self) -> FloatArray:
        """Values reshaped to (ny, nx)."""
        return self.values.reshape(self.grid.ny, self.grid.nx)


@dataclass(frozen=True)
class NetworkSpec:
    """Feedforward MDN architecture."""

    input_dim: int
    hidden: tuple[int, ...] = (128, 64, 32)
    num_components: int = 3
    dims: int = 2
    activation: str = "relu"
    dropout: float = 0.1

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise InvalidParameter(f"network input_dim must be positive, got {self.input_dim}")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise InvalidParameter(f"network.hidden must be positive sizes, got {self.hidden}")
        if self.num_components < 1:
            raise InvalidParameter(f"network.components must be >= 1, got {self.num_components}")
        if not 0 <= self.dropout < 1:
            raise InvalidParameter(f"network.dropout must be in [0, 1), got {self.dropout}")
        if self.activation != "relu":
            raise InvalidParameter(f"network.activation {self.activation!r} is not supported")

    @property
    def output_dim(self) -> int:
        return (2 * self.dims + 1) * self.num_components

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim, *self.hidden, self.output_dim]

    @property
    def param_shapes(self) -> list[tuple[int, ...]]:
        """Shapes in declared order: W1, b1, W2, b2, ..."""
        shapes: list[tuple[int, ...]] = []
        sizes = self.layer_sizes
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:], strict=True):
            shapes.append((fan_in, fan_out))
            shapes.append((fan_out,))
        return shapes

    def to_dict(self) -> dict[str, Any]:
        return {
            "input_dim": self.input_dim,
            "hidden": list(self.hidden),
            "num_components": self.num_components,
            "dims": self.dims,
            "activation": self.activation,
            "dropout": self.dropout,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NetworkSpec":
        return cls(
            input_dim=int(data["input_dim"]),
            hidden=tuple(int(h) for h in data["hidden"]),
            num_components=int(data["num_components"]),
            dims=int(data["dims"]),
            activation=str(data["activation"]),
            dropout=float(data["dropout"]),
        )


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and training-loop settings.

    The two penalty weights form a weak prior on the mixture outputs: the
    variance term (per m² of predicted variance) and the mean term (per m² of
    squared distance from the training-target centroid) only dominate for
    components whose likelihood gradient has vanished.
    """

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 300
    seed: int = 0
    variance_floor: float = 1e-6
    variance_ceiling: float = 1.0
    variance_penalty: float = 0.1
    mean_penalty: float = 1e-3
    clip_norm: float = 10.0  # 0 disables clipping
    multi_target: MultiTarget = MultiTarget.AVERAGE
    lr_schedule: LrSchedule = LrSchedule.COSINE
    restore_best: bool = True
    cv_dropouts: tuple[float, ...] = (0.15, 0.2, 0.25)

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise InvalidParameter("training.learning_rate must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidParameter("training.beta1 and training.beta2 must be in [0, 1)")
        if not self.epsilon > 0:
            raise InvalidParameter("training.epsilon must be positive")
        if self.batch_size < 1 or self.epochs < 0:
            raise InvalidParameter("training.batch_size must be >= 1 and epochs >= 0")
        if not self.variance_floor > 0:
            raise InvalidParameter("training.variance_floor must be positive")
        if not self.variance_ceiling > self.variance_floor:
            raise InvalidParameter(
                f"training.variance_ceiling must exceed the floor, got {self.variance_ceiling}"
            )
        if self.variance_penalty < 0 or self.mean_penalty < 0:
            raise InvalidParameter("training.variance_penalty and mean_penalty must be >= 0")
        if self.clip_norm < 0:
            raise InvalidParameter("training.clip_norm must be >= 0")
        if any(not 0 <= p < 1 for p in self.cv_dropouts):
            raise InvalidParameter("training.cv_dropouts must lie in [0, 1)")

    def to_dict(self) -> dict[str, Any]:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
            "variance_floor": self.variance_floor,
            "variance_ceiling": self.variance_ceiling,
            "variance_penalty": self.variance_penalty,
            "mean_penalty": self.mean_penalty,
            "clip_norm": self.clip_norm,
            "multi_target": self.multi_target.value,
            "lr_schedule": self.lr_schedule.value,
            "restore_best": self.restore_best,
            "cv_dropouts": list(self.cv_dropouts),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainConfig":
        return cls(
            learning_rate=float(data["learning_rate"]),
            beta1=float(data["beta1"]),
            beta2=float(data["beta2"]),
            epsilon=float(data["epsilon"]),
            batch_size=int(data["batch_size"]),
            epochs=int(data["epochs"]),
            seed=int(data["seed"]),
            variance_floor=float(data["variance_floor"]),
            variance_ceiling=float(data["variance_ceiling"]),
            variance_penalty=float(data["variance_penalty"]),
            mean_penalty=float(data["mean_penalty"]),
            clip_norm=float(data["clip_norm"]),
            multi_target=MultiTarget(data["multi_target"]),
            lr_schedule=LrSchedule(data["lr_schedule"]),
            restore_best=bool(data["restore_best"]),
            cv_dropouts=tuple(float(p) for p in data["cv_dropouts"]),
        )


@dataclass(eq=False)
class GmmPrediction:
    """Diagonal-covariance Gaussian mixture over damage location."""

    means: FloatArray  # (k, d)
    variances: FloatArray  # (k, d)
    weights: FloatArray  # (k,)

    def __post_init__(self) -> None:
        k = self.weights.shape[0]
        if self.means.ndim != 2 or self.means.shape[0] != k:
            raise DimensionMismatch(f"means shape {self.means.shape} does not match {k} weights")
        if self.variances.shape != self.means.shape:
            raise DimensionMismatch(
                f"variances shape {self.variances.shape} != means shape {self.means.shape}"
            )
        arrays = (self.means, self.variances, self.weights)
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise InvalidParameter("prediction parameters must be finite")
        if np.any(self.variances < 0) or np.any(self.weights < 0):
            raise InvalidParameter("prediction variances and weights must be non-negative")
        if k and abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise InvalidParameter(f"mixture weights sum to {self.weights.sum()}, not 1")

    @classmethod
    def from_points(cls, points: FloatArray) -> "GmmPrediction":
        """Degenerate prediction for point estimates (equal weights, zero variance)."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        k = points.shape[0]
        return cls(
            means=points,
            variances=np.zeros_like(points),
            weights=np.full(k, 1.0 / k) if k else np.zeros(0),
        )

    @property
    def num_components(self) -> int:
        return int(self.weights.shape[0])

    @property
    def best_component(self) -> int:
        return int(np.argmax(self.weights))

    def permuted(self, order: list[int] | NDArray[np.int64]) -> "GmmPrediction":
        return GmmPrediction(self.means[order], self.variances[order], self.weights[order])


@dataclass(eq=False)
class ModelArtifact:
    """Trained network with everything needed to predict from raw signals."""

    spec: NetworkSpec
    config: TrainConfig
    standardization: Standardization
    params: list[FloatArray]
    history: list[dict[str, Any]] = field(default_factory=list)
    cv: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self) -> None:
        shapes = [p.shape for p in self.params]
        if shapes != self.spec.param_shapes:
            raise DimensionMismatch(f"parameter shapes {shapes} != {self.spec.param_shapes}")
        if self.standardization.dim != self.spec.input_dim:
            raise DimensionMismatch(
                f"standardization has {self.standardization.dim} features, "
                f"network expects {self.spec.input_dim}"
            )


@dataclass(frozen=True)
class Assignment:
    """Component-to-damage mapping for one sample."""

    component_to_damage: tuple[int, ...]
    selected: tuple[int, ...]  # chosen component per true damage


@dataclass(frozen=True)
class MetricRow:
    """Metrics of one method on one sweep cell (NaN where not applicable)."""

    snr_db: float
    w_distort: float
    num_damages: int
    method: str
    ale: float
    ale_std: float
    ci95: float = math.nan
    max_var: float = math.nan
    mean_loglik: float = math.nan
    wall_time_s: float = 0.0

    @property
    def key(self) -> tuple[float, float, int, str]:
        return (self.snr_db, self.w_distort, self.num_damages, self.method)

    def to_dict(self) -> dict[str, Any]:
        return {
            "snr_db": encode_float(self.snr_db),
            "w_distort": self.w_distort,
            "num_damages": self.num_damages,
            "method": self.method,
            "ale": encode_float(self.ale),
            "ale_std": encode_float(self.ale_std),
            "ci95": encode_float(self.ci95),
            "max_var": encode_float(self.max_var),
            "mean_loglik": encode_float(self.mean_loglik),
            "wall_time_s": self.wall_time_s,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MetricRow":
        return cls(
            snr_db=decode_float(data["snr_db"]),
            w_distort=float(data["w_distort"]),
            num_damages=int(data["num_damages"]),
            method=str(data["method"]),
            ale=decode_float(data["ale"]),
            ale_std=decode_float(data["ale_std"]),
            ci95=decode_float(data["ci95"]),
            max_var=decode_float(data["max_var"]),
            mean_loglik=decode_float(data["mean_loglik"]),
            wall_time_s=float(data["wall_time_s"]),
        )


@dataclass
class MetricReport:
    """Metric rows keyed by (snr_db, w_distort, num_damages, method)."""

    rows: list[MetricRow] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)

    def table(self) -> dict[tuple[float, float, int, str], MetricRow]:
        return {row.key: row for row in self.rows}

    def sorted_rows(self) -> list[MetricRow]:
        return sorted(self.rows, key=lambda r: (r.snr_db, r.w_distort, r.num_damages, r.method))

    def row(self, method: str) -> MetricRow:
        """The single row for a method (single-cell reports)."""
        matches = [r for r in self.rows if r.method == method]
        if len(matches) != 1:
            raise LengthMismatch(f"expected one {method} row, found {len(matches)}")
        return matches[0]
