"""Matched field processing: correlate measured spectra against modeled spectra on a grid.

    b_p = |sum_m sum_q X(w_q, m) Z(w_q, m, p)*|^2 / sum_m sum_q |Z(w_q, m, p)|^2

The model spectra Z are the ideal (alpha = 1) scatter spectra for a damage at
grid point p. They are cached per scenario when they fit in the memory
budget and streamed in chunks otherwise.
"""

import logging
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import ArrayLike, NDArray
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from wavelocate.core.errors import DimensionMismatch, EmptyModel, InvalidDamageCount
from wavelocate.core.interfaces import Localizer
from wavelocate.core.logs import stderr_console
from wavelocate.core.models import (
    MAX_QUADRANT_DAMAGES,
    AmbiguitySurface,
    ComplexArray,
    Dataset,
    DispersionTable,
    FloatArray,
    GmmPrediction,
    QueryGrid,
    ScenarioConfig,
    SensorArray,
    quadrant_of,
)
from wavelocate.dispersion.factory import build_table
from wavelocate.wavefield.synthesis import (
    multistatic_spectra,
    scatter_spectrum,
    to_frequency_domain,
)

logger = logging.getLogger(__name__)

BYTES_PER_VALUE = np.dtype(np.complex128).itemsize


def model_spectrum(
    table: DispersionTable,
    pair: tuple[ArrayLike, ArrayLike],
    point: ArrayLike,
    *,
    r_floor: float = 1e-3,
    weights: FloatArray | None = None,
) -> ComplexArray:
    """Ideal-conditions spectrum Z for a damage at a query point (alpha = 1)."""
    spectrum = scatter_spectrum(table, pair, point, 1.0, r_floor=r_floor)
    return spectrum if weights is None else spectrum * weights


class ModelBank:
    """Model spectra Z(w_q, m, p) of one scenario over a query grid."""

    def __init__(
        self,
        table: DispersionTable,
        sensors: SensorArray,
        grid: QueryGrid,
        *,
        weights: FloatArray | None = None,
        r_floor: float = 1e-3,
        cache_mb: float = 512.0,
        threads: int | None = None,
    ) -> None:
        """Initialize the bank and precompute Z when it fits in `cache_mb`.

        Args:
            table: Dispersion table of the ideal model.
            sensors: Sensor array; rows of Z follow its pair index.
            grid: Query grid.
            weights: Excitation weights applied to Z.
            r_floor: Minimum admissible path length.
            cache_mb: Memory budget for cached model spectra.
            threads: Worker cap for streamed chunk evaluation.
        """
        self.table = table
        self.sensors = sensors
        self.grid = grid
        self._weights = weights
        self._r_floor = r_floor
        self._threads = threads

        per_point = sensors.num_pairs * table.grid.num_points * BYTES_PER_VALUE
        budget = int(cache_mb * 1024 * 1024)
        self.chunk_size = max(1, min(grid.size, budget // per_point))
        self.cached = grid.size * per_point <= budget

        self._points = grid.points
        self._spectra: ComplexArray | None = None
        if self.cached:
            self._spectra = self._compute(0, grid.size)
            self._norms = np.sum(np.abs(self._spectra) ** 2, axis=(1, 2))
        else:
            self._norms = np.concatenate([
                np.sum(np.abs(self._compute(start, stop)) ** 2, axis=(1, 2))
                for start, stop in self._chunks()
            ])
            logger.info(
                "model spectra exceed %.0f MB; streaming %d points per chunk",
                cache_mb,
                self.chunk_size,
            )

        empty = np.nonzero(self._norms == 0)[0]
        if empty.size:
            x, y = grid.point(int(empty[0]))
            raise EmptyModel(f"model spectrum is identically zero at grid point ({x:g}, {y:g})")

    def _chunks(self) -> Iterator[tuple[int, int]]:
        for start in range(0, self.grid.size, self.chunk_size):
            yield start, min(start + self.chunk_size, self.grid.size)

    def _compute(self, start: int, stop: int) -> ComplexArray:
        """Z for grid points [start, stop), shape (P, M, Q)."""
        return np.stack([
            multistatic_spectra(
                self.table,
                self.sensors,
                point[np.newaxis, :],
                1.0,
                r_floor=self._r_floor,
                weights=self._weights,
            )
            for point in self._points[start:stop]
        ])

    def spectra(self, index: int) -> ComplexArray:
        """Z of one grid point, shape (M, Q)."""
        if self._spectra is not None:
            return self._spectra[index]
        return self._compute(index, index + 1)[0]

    def ambiguity(self, data: ComplexArray) -> AmbiguitySurface:
        """Ambiguity surface of measured spectra X with shape (M, Q)."""
        expected = (self.sensors.num_pairs, self.table.grid.num_points)
        if data.shape != expected:
            raise DimensionMismatch(f"data spectra have shape {data.shape}, expected {expected}")

        if self._spectra is not None:
            correlation = np.tensordot(self._spectra.conj(), data, axes=([1, 2], [0, 1]))
        else:

            def chunk(bounds: tuple[int, int]) -> ComplexArray:
                z = self._compute(*bounds)
                return np.tensordot(z.conj(), data, axes=([1, 2], [0, 1]))

            with ThreadPoolExecutor(max_workers=self._threads) as pool:
                correlation = np.concatenate(list(pool.map(chunk, self._chunks())))

        values = np.abs(correlation) ** 2 / self._norms
        return AmbiguitySurface(np.asarray(values, dtype=np.float64), self.grid)


def ambiguity(
    data: ComplexArray,
    table: DispersionTable,
    grid: QueryGrid,
    sensors: SensorArray,
    *,
    weights: FloatArray | None = None,
    r_floor: float = 1e-3,
    cache_mb: float = 512.0,
) -> AmbiguitySurface:
    """One-off ambiguity surface; build a ModelBank to reuse Z across samples."""
    bank = ModelBank(table, sensors, grid, weights=weights, r_floor=r_floor, cache_mb=cache_mb)
    return bank.ambiguity(data)


def _peak(values: FloatArray, indices: NDArray[np.intp]) -> int:
    # argmax returns the first maximum, i.e. the lowest row-major index
    return int(indices[np.argmax(values[indices])])


def localize(
    surface: AmbiguitySurface,
    num_damages: int,
    quadrants: Sequence[int] | None = None,
) -> list[tuple[float, float]]:
    """Location estimates from an ambiguity surface.

    Args:
        surface: Ambiguity surface.
        num_damages: Number of damages to report (1..4).
        quadrants: Quadrants known to contain a damage (used when num_damages > 1).
            Without them, the quadrants with the highest peaks are taken.

    Returns:
        One (x, y) grid point per damage.

    Raises:
        InvalidDamageCount: If num_damages is outside 1..4 or quadrants mismatch.
    """
    if not 1 <= num_damages <= MAX_QUADRANT_DAMAGES:
        raise InvalidDamageCount(
            f"num_damages must be in 1..{MAX_QUADRANT_DAMAGES}, got {num_damages}"
        )
    grid = surface.grid
    values = surface.values
    if num_damages == 1:
        return [grid.point(int(np.argmax(values)))]

    labels = grid.quadrants()
    members = [np.nonzero(labels == q)[0] for q in range(MAX_QUADRANT_DAMAGES)]
    if quadrants is None:
        peaks = [float(values[m].max()) for m in members]
        quadrants = sorted(range(MAX_QUADRANT_DAMAGES), key=lambda q: -peaks[q])[:num_damages]
    elif len(quadrants) != num_damages or len(set(quadrants)) != num_damages:
        raise InvalidDamageCount(
            f"expected {num_damages} distinct quadrants, got {list(quadrants)}"
        )
    if any(not 0 <= q < MAX_QUADRANT_DAMAGES for q in quadrants):
        raise InvalidDamageCount(f"quadrant indices must be in 0..3, got {list(quadrants)}")
    return [grid.point(_peak(values, members[q])) for q in quadrants]


class MfpLocalizer(Localizer):
    """Matched-field baseline evaluated on dataset splits."""

    def __init__(
        self,
        nx: int = 50,
        ny: int = 50,
        *,
        cache_mb: float = 512.0,
        threads: int | None = None,
        reveal_quadrants: bool = True,
        quiet: bool = True,
    ) -> None:
        """Initialize the localizer.

        Args:
            nx: Query grid points along x.
            ny: Query grid points along y.
            cache_mb: Model-spectra cache budget.
            threads: Worker cap for streamed evaluation.
            reveal_quadrants: Supply the true damage quadrants to `localize`.
            quiet: Suppress the progress bar.
        """
        self._nx = nx
        self._ny = ny
        self._cache_mb = cache_mb
        self._threads = threads
        self._reveal = reveal_quadrants
        self._quiet = quiet
        self._bank: ModelBank | None = None
        self._bank_scenario: ScenarioConfig | None = None

    @property
    def name(self) -> str:
        return "mfp"

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self._nx, self._ny

    def bank_for(self, dataset: Dataset) -> ModelBank:
        """Model bank for the dataset's scenario, built once per scenario."""
        scenario = dataset.scenario
        if self._bank is None or self._bank_scenario is not scenario:
            grid = QueryGrid(scenario.length, scenario.width, self._nx, self._ny)
            table = build_table(scenario.dispersion, scenario.material, scenario.grid)
            self._bank = ModelBank(
                table,
                scenario.sensors,
                grid,
                weights=scenario.excitation.weights(scenario.grid.frequencies),
                r_floor=scenario.r_floor,
                cache_mb=self._cache_mb,
                threads=self._threads,
            )
            self._bank_scenario = scenario
        return self._bank

    def surfaces(
        self, dataset: Dataset, split: str, limit: int | None = None
    ) -> Iterator[AmbiguitySurface]:
        """Ambiguity surfaces of a split's samples, in sample order."""
        bank = self.bank_for(dataset)
        raw = dataset.raw_signals(split)
        if limit is not None:
            raw = raw[:limit]
        for signals in raw:
            yield bank.ambiguity(to_frequency_domain(signals, dataset.scenario.grid))

    def predict_split(self, dataset: Dataset, split: str) -> list[GmmPrediction]:
        """Point estimates for every sample of a split (degenerate mixtures)."""
        scenario = dataset.scenario
        truths = dataset.truths(split)
        predictions: list[GmmPrediction] = []

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=stderr_console,
            transient=True,
            disable=self._quiet,
        ) as progress:
            task = progress.add_task(f"[cyan]MFP on {len(truths)} samples...", total=len(truths))
            for surface, truth in zip(self.surfaces(dataset, split), truths, strict=True):
                quadrants = None
                if self._reveal and truth.count > 1:
                    quadrants = [
                        quadrant_of(x, y, scenario.length, scenario.width)
                        for x, y in truth.locations
                    ]
                points = localize(surface, truth.count, quadrants)
                predictions.append(GmmPrediction.from_points(np.array(points)))
                progress.advance(task)

        return predictions
