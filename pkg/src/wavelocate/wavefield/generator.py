"""Monte-Carlo dataset generation.

Every sample derives its random streams from (seed, stream, split, index), so
samples can be produced by a thread pool in any order and the assembled
dataset is still bit-identical for a given master seed.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
)

from wavelocate.core.errors import DimensionMismatch, InvalidParameter
from wavelocate.core.logs import stderr_console
from wavelocate.core.models import (
    SPLITS,
    DamagePolicy,
    DamagePolicyKind,
    DamageSet,
    Dataset,
    DispersionTable,
    FloatArray,
    Sample,
    ScenarioConfig,
    SensorArray,
    Standardization,
)
from wavelocate.dispersion.factory import build_table
from wavelocate.wavefield.synthesis import multistatic_spectra, path_lengths, to_time_domain
from wavelocate.wavefield.uncertainty import add_awgn, realized_snr_db, sample_alpha

logger = logging.getLogger(__name__)

STREAM_SENSORS = 0
STREAM_DAMAGE = 1
STREAM_ALPHA = 2
STREAM_NOISE = 3
SPLIT_TAGS = {split: tag for tag, split in enumerate(SPLITS)}
MAX_REDRAWS = 1000


def stream_rng(seed: int, stream: int, *keys: int) -> np.random.Generator:
    """Independent generator for one named stream of one sample."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream, *keys]))


def draw_sensors(count: int, length: float, width: float, seed: int) -> SensorArray:
    """Sensor positions drawn once per scenario seed."""
    return SensorArray.random(count, length, width, stream_rng(seed, STREAM_SENSORS))


def draw_damages(
    policy: DamagePolicy, length: float, width: float, rng: np.random.Generator
) -> DamageSet:
    """Uniform location for a single damage, otherwise one per distinct quadrant."""
    count = policy.count
    if policy.kind is DamagePolicyKind.UP_TO:
        count = int(rng.integers(1, policy.count + 1))
    if count == 1:
        location = rng.uniform(0.0, 1.0, size=(1, 2)) * np.array([length, width])
        return DamageSet(location)

    quadrants = rng.permutation(4)[:count]
    half = np.array([length / 2, width / 2])
    corners = np.column_stack([quadrants % 2, quadrants // 2]) * half
    return DamageSet(corners + rng.uniform(0.0, 1.0, size=(count, 2)) * half)


@dataclass(eq=False)
class RawSample:
    """Unstandardized sample as produced by the simulator."""

    signals: FloatArray
    truth: DamageSet
    alpha: float
    snr_db: float


class DatasetGenerator:
    """Synthesizes train/val/test splits for one scenario."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        master_seed: int,
        *,
        table: DispersionTable | None = None,
        threads: int | None = None,
        quiet: bool = False,
    ) -> None:
        """Initialize the generator.

        Args:
            scenario: Scenario to simulate.
            master_seed: Seed from which every stream derives.
            table: Precomputed dispersion table (built from the scenario if omitted).
            threads: Worker cap for per-sample generation.
            quiet: Suppress the progress bar.
        """
        if master_seed < 0:
            raise InvalidParameter(f"seed must be non-negative, got {master_seed}")
        self._scenario = scenario
        self._seed = master_seed
        if table is None:
            table = build_table(scenario.dispersion, scenario.material, scenario.grid)
        elif table.grid != scenario.grid:
            raise DimensionMismatch("dispersion table grid differs from the scenario grid")
        self._table = table
        self._threads = threads
        self._quiet = quiet
        self._weights = scenario.excitation.weights(scenario.grid.frequencies)

        uncertainty = scenario.uncertainty
        self._alpha_seed = (
            master_seed if uncertainty.distortion_seed is None else uncertainty.distortion_seed
        )
        self._noise_seed = master_seed if uncertainty.noise_seed is None else uncertainty.noise_seed

    def simulate(self, split: str, index: int) -> RawSample:
        """Simulate sample `index` of a split."""
        scenario = self._scenario
        tag = SPLIT_TAGS[split]
        damage_rng = stream_rng(self._seed, STREAM_DAMAGE, tag, index)
        sensors = scenario.sensors

        for _ in range(MAX_REDRAWS):
            truth = draw_damages(scenario.damage_policy, scenario.length, scenario.width, damage_rng)
            shortest = min(
                float(path_lengths(sensors.transmitters, sensors.receivers, d).min())
                for d in truth.locations
            )
            if shortest > scenario.r_floor:
                break
        else:
            raise InvalidParameter(
                f"could not place damages {MAX_REDRAWS} times with r_floor={scenario.r_floor}"
            )

        alpha = sample_alpha(
            scenario.uncertainty.w_distort, stream_rng(self._alpha_seed, STREAM_ALPHA, tag, index)
        )
        spectra = multistatic_spectra(
            self._table,
            sensors,
            truth.locations,
            alpha,
            r_floor=scenario.r_floor,
            weights=self._weights,
        )
        clean = to_time_domain(spectra, scenario.grid)
        noisy = add_awgn(
            clean,
            scenario.uncertainty.snr_db,
            stream_rng(self._noise_seed, STREAM_NOISE, tag, index),
        )
        return RawSample(noisy, truth, alpha, realized_snr_db(clean, noisy))

    def generate(self, counts: dict[str, int]) -> Dataset:
        """Generate every split and standardize on the training split.

        Args:
            counts: Number of samples per split name.

        Returns:
            Standardized dataset.
        """
        unknown = set(counts) - set(SPLITS)
        if unknown:
            raise InvalidParameter(f"unknown split(s): {', '.join(sorted(unknown))}")
        if any(n < 0 for n in counts.values()):
            raise InvalidParameter(f"split counts must be >= 0, got {counts}")

        jobs = [(split, i) for split in SPLITS for i in range(counts.get(split, 0))]
        raw = self._run(jobs)

        by_split: dict[str, list[RawSample]] = {split: [] for split in SPLITS}
        for (split, _), sample in zip(jobs, raw, strict=True):
            by_split[split].append(sample)

        train = by_split["train"]
        if train:
            standardization = Standardization.fit(np.stack([s.signals.ravel() for s in train]))
        else:
            standardization = Standardization.identity(self._scenario.input_dim)

        shape = self._scenario.signal_shape
        splits = {
            split: [
                Sample(
                    signals=standardization.apply(s.signals.ravel()).reshape(shape),
                    truth=s.truth,
                    alpha_used=s.alpha,
                    snr_used=s.snr_db,
                )
                for s in samples
            ]
            for split, samples in by_split.items()
        }
        dataset = Dataset(self._scenario, splits, standardization, self._seed)
        logger.info("generated dataset %s", dataset.counts)
        return dataset

    def _run(self, jobs: list[tuple[str, int]]) -> list[RawSample]:
        if not jobs:
            return []
        with ThreadPoolExecutor(max_workers=self._threads) as pool:
            results = pool.map(lambda job: self.simulate(*job), jobs)
            if self._quiet:
                return list(results)
            collected: list[RawSample] = []
            with Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                BarColumn(),
                TaskProgressColumn(),
                TimeElapsedColumn(),
                console=stderr_console,
                transient=True,
            ) as progress:
                task = progress.add_task(f"[green]Simulating {len(jobs)} samples...", total=len(jobs))
                for sample in results:
                    collected.append(sample)
                    progress.advance(task)
            return collected


def generate_dataset(
    scenario: ScenarioConfig,
    counts: dict[str, int],
    master_seed: int,
    *,
    table: DispersionTable | None = None,
    threads: int | None = None,
    quiet: bool = True,
) -> Dataset:
    """Generate a standardized dataset; see DatasetGenerator."""
    generator = DatasetGenerator(scenario, master_seed, table=table, threads=threads, quiet=quiet)
    return generator.generate(counts)


def mean_realized_snr(samples: list[Sample]) -> float:
    """Mean realized SNR in dB over noisy samples (inf if all are noiseless)."""
    finite = [s.snr_used for s in samples if math.isfinite(s.snr_used)]
    return float(np.mean(finite)) if finite else math.inf
