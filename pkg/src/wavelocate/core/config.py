"""Run configuration: TOML parsing, validation and resolution of defaults.

Every key has a default. Unknown sections or keys are rejected with their
dotted name. The resolved document (defaults and seed override applied) is
what gets echoed into output directories as resolved.json.
"""

import copy
import math
import sys
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib

from wavelocate.core.errors import ConfigError, InvalidParameter
from wavelocate.core.models import (
    DamagePolicy,
    DamagePolicyKind,
    DispersionSpec,
    Excitation,
    ExcitationKind,
    FrequencyGrid,
    LrSchedule,
    Method,
    MultiTarget,
    NetworkSpec,
    PlateMaterial,
    ScenarioConfig,
    SensorArray,
    TrainConfig,
    UncertaintySpec,
    encode_float,
)

if TYPE_CHECKING:
    from wavelocate.evaluation.sweep import SweepSpec

MAX_SEED = 2**64 - 1
NETWORK_PRESETS = {"desk": [128, 64, 32], "full": [600, 300, 60]}

Converter = Callable[[str, Any], Any]


def _fail(key: str, expected: str, value: Any) -> ConfigError:
    return ConfigError(f"{key} must be {expected}, got {value!r}")


def _float(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise _fail(key, "a number", value)
    return float(value)


def _int(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(key, "an integer", value)
    return value


def _bool(key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise _fail(key, "true or false", value)
    return value


def _str(key: str, value: Any) -> str:
    if not isinstance(value, str):
        raise _fail(key, "a string", value)
    return value


def _snr(key: str, value: Any) -> float:
    """A number in dB, or "inf"/"infinite" for noiseless data."""
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinite", "+inf"):
        return math.inf
    number = _float(key, value)
    if math.isnan(number) or number == -math.inf:
        raise _fail(key, "a number or 'inf'", value)
    return number


def _seed(key: str, value: Any) -> int:
    number = _int(key, value)
    if not 0 <= number <= MAX_SEED:
        raise _fail(key, "an unsigned 64-bit integer", value)
    return number


def _optional(convert: Converter) -> Converter:
    def wrapped(key: str, value: Any) -> Any:
        return None if value is None else convert(key, value)

    return wrapped


def _list(convert: Converter) -> Converter:
    def wrapped(key: str, value: Any) -> list[Any]:
        if not isinstance(value, list):
            raise _fail(key, "a list", value)
        return [convert(f"{key}[{i}]", item) for i, item in enumerate(value)]

    return wrapped


def _choice(*options: str) -> Converter:
    def wrapped(key: str, value: Any) -> str:
        text = _str(key, value)
        if text not in options:
            raise _fail(key, f"one of {', '.join(options)}", value)
        return text

    return wrapped


def _point(key: str, value: Any) -> list[float]:
    point = _list(_float)(key, value)
    if len(point) != 2:
        raise _fail(key, "an [x, y] pair", value)
    return point


# section -> key -> (converter, default)
SCHEMA: dict[str, dict[str, tuple[Converter, Any]]] = {
    "plate": {
        "length": (_float, 1.0),
        "width": (_float, 1.0),
        "youngs_modulus": (_float, 69e9),
        "poisson_ratio": (_float, 0.33),
        "density": (_float, 2700.0),
        "thickness": (_float, 0.003),
        "dispersion": (_choice("rayleigh_lamb", "nondispersive", "power_law"), "rayleigh_lamb"),
        "modes": (_list(_choice("S0", "A0")), ["S0", "A0"]),
        "wave_speed": (_float, 5000.0),
        "power_a": (_float, 1.0),
        "power_b": (_float, 1.0),
    },
    "sensors": {
        "count": (_int, 8),
        "positions": (_optional(_list(_point)), None),
    },
    "frequencies": {
        "num_points": (_int, 256),
        "f_min": (_float, -500e3),
        "f_max": (_float, 500e3),
        "excitation": (_choice("impulse", "gaussian"), "impulse"),
        "center_frequency": (_float, 100e3),
        "bandwidth": (_float, 50e3),
    },
    "uncertainty": {
        "w_distort": (_float, 0.0),
        "snr_db": (_snr, math.inf),
        "noise_seed": (_optional(_seed), None),
        "distortion_seed": (_optional(_seed), None),
        "damage_policy": (_choice("fixed", "up_to"), "fixed"),
        "num_damages": (_int, 1),
        "r_floor": (_float, 1e-3),
    },
    "network": {
        "preset": (_choice(*NETWORK_PRESETS), "desk"),
        "input_dim": (_optional(_int), None),
        "hidden": (_optional(_list(_int)), None),
        "components": (_int, 3),
        "dropout": (_float, 0.1),
        "activation": (_choice("relu"), "relu"),
    },
    "training": {
        "learning_rate": (_float, 1e-3),
        "beta1": (_float, 0.9),
        "beta2": (_float, 0.999),
        "epsilon": (_float, 1e-8),
        "batch_size": (_int, 32),
        "epochs": (_int, 300),
        "seed": (_optional(_seed), None),
        "variance_floor": (_float, 1e-6),
        "variance_ceiling": (_float, 1.0),
        "variance_penalty": (_float, 0.1),
        "mean_penalty": (_float, 1e-3),
        "clip_norm": (_float, 10.0),
        "multi_target": (_choice("average", "first"), "average"),
        "lr_schedule": (_choice("cosine", "constant"), "cosine"),
        "restore_best": (_bool, True),
        "cv_dropouts": (_list(_float), [0.15, 0.2, 0.25]),
        "train_samples": (_int, 1000),
        "val_samples": (_int, 200),
        "test_samples": (_int, 100),
    },
    "mfp": {
        "nx": (_int, 50),
        "ny": (_int, 50),
        "cache_mb": (_float, 512.0),
    },
    "sweep": {
        "preset": (_optional(_choice("noise", "uncertainty", "damages")), None),
        "snr_db": (_list(_snr), []),
        "w_distort": (_list(_float), []),
        "num_damages": (_list(_int), []),
        "methods": (_list(_choice("mdn", "mfp")), ["mdn", "mfp"]),
        "components_rule": (_choice("fixed", "damages_plus_one"), "fixed"),
    },
    "io": {
        "threads": (_optional(_int), None),
        "quiet": (_bool, False),
    },
}


def resolve(document: dict[str, Any], seed: int | None = None) -> dict[str, Any]:
    """Validate a parsed document and fill in defaults.

    Args:
        document: Parsed TOML.
        seed: Seed overriding the document's top-level `seed`.

    Returns:
        Fully resolved configuration.

    Raises:
        ConfigError: Unknown keys, wrong types or out-of-range values.
    """
    resolved: dict[str, Any] = {}
    for name in document:
        if name != "seed" and name not in SCHEMA:
            raise ConfigError(f"unknown configuration section {name!r}")

    for section, fields in SCHEMA.items():
        given = document.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"[{section}] must be a table")
        unknown = sorted(set(given) - set(fields))
        if unknown:
            raise ConfigError(f"unknown configuration key {section}.{unknown[0]}")
        resolved[section] = {
            key: convert(f"{section}.{key}", given[key]) if key in given else copy.copy(default)
            for key, (convert, default) in fields.items()
        }

    raw_seed = seed if seed is not None else document.get("seed")
    resolved["seed"] = None if raw_seed is None else _seed("seed", raw_seed)
    return resolved


def load_document(path: Path | None) -> dict[str, Any]:
    """Parse a TOML run configuration (an empty document when path is None)."""
    if path is None:
        return {}
    try:
        with path.open("rb") as handle:
            return tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Resolved run configuration with builders for the pipeline's inputs."""

    values: dict[str, Any]

    @classmethod
    def load(cls, path: Path | None = None, seed: int | None = None) -> "RunConfig":
        return cls(resolve(load_document(path), seed))

    @classmethod
    def from_document(cls, document: dict[str, Any], seed: int | None = None) -> "RunConfig":
        return cls(resolve(document, seed))

    def section(self, name: str) -> dict[str, Any]:
        return dict(self.values[name])

    @property
    def seed(self) -> int | None:
        value = self.values["seed"]
        return None if value is None else int(value)

    def require_seed(self) -> int:
        """The master seed; mandatory for generation, training and sweeps."""
        if self.seed is None:
            raise ConfigError("a master seed is required: set `seed` in the config or pass --seed")
        return self.seed

    @property
    def threads(self) -> int | None:
        threads: int | None = self.values["io"]["threads"]
        if threads is not None and threads < 1:
            raise ConfigError(f"io.threads must be >= 1, got {threads}")
        return threads

    @property
    def quiet(self) -> bool:
        return bool(self.values["io"]["quiet"])

    def material(self) -> PlateMaterial:
        plate = self.values["plate"]
        return PlateMaterial(
            youngs_modulus=plate["youngs_modulus"],
            poisson_ratio=plate["poisson_ratio"],
            density=plate["density"],
            thickness=plate["thickness"],
        )

    def dispersion_spec(self) -> DispersionSpec:
        plate = self.values["plate"]
        return DispersionSpec(
            model=plate["dispersion"],
            modes=tuple(plate["modes"]),
            wave_speed=plate["wave_speed"],
            power_a=plate["power_a"],
            power_b=plate["power_b"],
        )

    def grid(self) -> FrequencyGrid:
        freq = self.values["frequencies"]
        return FrequencyGrid(freq["num_points"], freq["f_min"], freq["f_max"])

    def excitation(self) -> Excitation:
        freq = self.values["frequencies"]
        return Excitation(
            kind=ExcitationKind(freq["excitation"]),
            center_frequency=freq["center_frequency"],
            bandwidth=freq["bandwidth"],
        )

    def uncertainty(self) -> UncertaintySpec:
        unc = self.values["uncertainty"]
        return UncertaintySpec(
            w_distort=unc["w_distort"],
            snr_db=unc["snr_db"],
            noise_seed=unc["noise_seed"],
            distortion_seed=unc["distortion_seed"],
        )

    def damage_policy(self) -> DamagePolicy:
        unc = self.values["uncertainty"]
        return DamagePolicy(DamagePolicyKind(unc["damage_policy"]), unc["num_damages"])

    def sensors(self, seed: int) -> SensorArray:
        """Explicit positions, or a uniform draw from the scenario seed."""
        from wavelocate.wavefield.generator import draw_sensors

        section = self.values["sensors"]
        plate = self.values["plate"]
        if section["positions"] is not None:
            return SensorArray(np.asarray(section["positions"], dtype=np.float64))
        if section["count"] < 2:
            raise ConfigError(f"sensors.count must be >= 2, got {section['count']}")
        return draw_sensors(section["count"], plate["length"], plate["width"], seed)

    def scenario(self, seed: int | None = None) -> ScenarioConfig:
        """Scenario for dataset generation (sensors drawn from the master seed)."""
        seed = self.require_seed() if seed is None else seed
        plate = self.values["plate"]
        return ScenarioConfig(
            sensors=self.sensors(seed),
            length=plate["length"],
            width=plate["width"],
            material=self.material(),
            dispersion=self.dispersion_spec(),
            grid=self.grid(),
            uncertainty=self.uncertainty(),
            damage_policy=self.damage_policy(),
            excitation=self.excitation(),
            r_floor=self.values["uncertainty"]["r_floor"],
        )

    @property
    def counts(self) -> dict[str, int]:
        training = self.values["training"]
        return {
            "train": training["train_samples"],
            "val": training["val_samples"],
            "test": training["test_samples"],
        }

    def network_spec(self, input_dim: int) -> NetworkSpec:
        """Architecture for a dataset with `input_dim` features.

        An explicit `network.input_dim` wins, so a mismatch surfaces at training time.
        """
        network = self.values["network"]
        hidden = network["hidden"] or NETWORK_PRESETS[network["preset"]]
        if network["input_dim"] is not None:
            input_dim = network["input_dim"]
        return NetworkSpec(
            input_dim=input_dim,
            hidden=tuple(hidden),
            num_components=network["components"],
            activation=network["activation"],
            dropout=network["dropout"],
        )

    def train_config(self) -> TrainConfig:
        training = self.values["training"]
        seed = training["seed"]
        if seed is None:
            seed = self.require_seed()
        return TrainConfig(
            learning_rate=training["learning_rate"],
            beta1=training["beta1"],
            beta2=training["beta2"],
            epsilon=training["epsilon"],
            batch_size=training["batch_size"],
            epochs=training["epochs"],
            seed=seed,
            variance_floor=training["variance_floor"],
            variance_ceiling=training["variance_ceiling"],
            variance_penalty=training["variance_penalty"],
            mean_penalty=training["mean_penalty"],
            clip_norm=training["clip_norm"],
            multi_target=MultiTarget(training["multi_target"]),
            lr_schedule=LrSchedule(training["lr_schedule"]),
            restore_best=training["restore_best"],
            cv_dropouts=tuple(training["cv_dropouts"]),
        )

    @property
    def methods(self) -> tuple[Method, ...]:
        return tuple(Method(m) for m in self.values["sweep"]["methods"])

    def mfp_options(self) -> dict[str, Any]:
        mfp = self.values["mfp"]
        if mfp["cache_mb"] <= 0:
            raise InvalidParameter(f"mfp.cache_mb must be positive, got {mfp['cache_mb']}")
        return {"nx": mfp["nx"], "ny": mfp["ny"], "cache_mb": mfp["cache_mb"]}

    def resolved(self) -> dict[str, Any]:
        """JSON-ready resolved document (infinite SNR written as "inf")."""
        document = copy.deepcopy(self.values)
        document["uncertainty"]["snr_db"] = encode_float(document["uncertainty"]["snr_db"])
        document["sweep"]["snr_db"] = [encode_float(v) for v in document["sweep"]["snr_db"]]
        return document

    def sweep_spec(self) -> "SweepSpec":
        """Sweep grid: a preset, explicit lists, or the single [uncertainty] cell.

        Empty lists fall back to the matching [uncertainty] value. Explicit
        lists override the preset's.
        """
        from wavelocate.evaluation.sweep import PRESETS, ComponentsRule, SweepSpec

        section = self.values["sweep"]
        uncertainty = self.values["uncertainty"]
        base = PRESETS[section["preset"]] if section["preset"] else None
        if base is None:
            base = SweepSpec(
                snr_db=(uncertainty["snr_db"],),
                w_distort=(uncertainty["w_distort"],),
                num_damages=(uncertainty["num_damages"],),
                components_rule=ComponentsRule(section["components_rule"]),
                damage_policy=DamagePolicyKind(uncertainty["damage_policy"]),
            )
        return SweepSpec(
            snr_db=tuple(section["snr_db"]) or base.snr_db,
            w_distort=tuple(section["w_distort"]) or base.w_distort,
            num_damages=tuple(section["num_damages"]) or base.num_damages,
            methods=self.methods,
            components_rule=(
                base.components_rule
                if section["preset"]
                else ComponentsRule(section["components_rule"])
            ),
            damage_policy=base.damage_policy,
        )
