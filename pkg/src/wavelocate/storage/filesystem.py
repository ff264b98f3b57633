"""Filesystem storage backend for datasets, models, reports and surfaces."""

import csv
import io
import json
import logging
import math
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import numpy as np

from wavelocate.core.errors import DimensionMismatch, StorageError
from wavelocate.core.interfaces import StorageBackend
from wavelocate.core.models import (
    DATASET_FORMAT,
    MODEL_FORMAT,
    REPORT_FORMAT,
    SPLITS,
    AmbiguitySurface,
    DamageSet,
    Dataset,
    DispersionTable,
    FloatArray,
    MetricReport,
    MetricRow,
    ModelArtifact,
    NetworkSpec,
    Sample,
    ScenarioConfig,
    Standardization,
    TrainConfig,
    encode_float,
)

logger = logging.getLogger(__name__)

LITTLE_F64 = np.dtype("<f8")
PGM_MAX = 65535
REPORT_COLUMNS = (
    "snr_db",
    "w_distort",
    "num_damages",
    "method",
    "ale",
    "ale_std",
    "ci95",
    "max_var",
    "mean_loglik",
    "wall_time_s",
)


def format_number(value: float) -> str:
    """Full-precision text for CSV cells; NaN becomes an empty cell."""
    if math.isnan(value):
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


@contextmanager
def _io_errors(path: Path) -> Iterator[None]:
    try:
        yield
    except OSError as e:
        raise StorageError(f"cannot access {path}: {e.strerror or e}") from e


def _write_json(path: Path, data: dict[str, Any]) -> None:
    with _io_errors(path):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _read_json(path: Path, expected_format: str | None = None) -> dict[str, Any]:
    if not path.exists():
        raise StorageError(f"missing {path}")
    with _io_errors(path):
        text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise StorageError(f"{path} is not valid JSON: {e}") from e
    if expected_format is not None and data.get("format") != expected_format:
        raise StorageError(
            f"{path} has format {data.get('format')!r}, expected {expected_format!r}"
        )
    return dict(data)


def _split_info(info: dict[str, Any]) -> tuple[int, list[float], list[float | None]]:
    """Sample count with its per-sample alpha and SNR lists from a manifest entry."""
    count = int(info["count"])
    alphas = [float(a) for a in info["alpha"]]
    snrs = [None if s is None else float(s) for s in info["snr_db"]]
    if len(alphas) != count or len(snrs) != count:
        raise ValueError(f"{count} samples but {len(alphas)} alphas and {len(snrs)} SNRs")
    return count, alphas, snrs


class FilesystemStorage(StorageBackend):
    """Store wavelocate artifacts on the local filesystem."""

    MANIFEST_FILENAME = "manifest.json"
    MODEL_FILENAME = "model.json"
    PARAMS_FILENAME = "params.f64"
    REPORT_CSV = "report.csv"
    REPORT_JSON = "report.json"
    RESOLVED_FILENAME = "resolved.json"

    def save_dataset(self, dataset: Dataset, output_dir: Path) -> None:
        """Write manifest.json plus one little-endian float64 blob per split.

        Args:
            dataset: Dataset to save.
            output_dir: Target directory.
        """
        scenario = dataset.scenario
        k_max = dataset.k_max
        row_length = scenario.input_dim + 2 * k_max + 1
        splits: dict[str, Any] = {}

        for split in SPLITS:
            samples = dataset.samples(split)
            rows = np.zeros((len(samples), row_length))
            for i, sample in enumerate(samples):
                rows[i, : scenario.input_dim] = sample.signals.ravel()
                rows[i, scenario.input_dim : -1] = sample.truth.padded(k_max)
                rows[i, -1] = sample.truth.count
            path = output_dir / f"{split}.f64"
            with _io_errors(path):
                output_dir.mkdir(parents=True, exist_ok=True)
                path.write_bytes(rows.astype(LITTLE_F64).tobytes())
            splits[split] = {
                "count": len(samples),
                "alpha": [s.alpha_used for s in samples],
                "snr_db": [None if math.isinf(s.snr_used) else s.snr_used for s in samples],
            }

        manifest = {
            "format": DATASET_FORMAT,
            "master_seed": dataset.master_seed,
            "scenario": scenario.to_dict(),
            "k_max": k_max,
            "row_length": row_length,
            "signal_shape": list(scenario.signal_shape),
            "splits": splits,
            "standardization": dataset.standardization.to_dict(),
        }
        _write_json(output_dir / self.MANIFEST_FILENAME, manifest)
        logger.info("saved dataset %s to %s", dataset.counts, output_dir)

    def load_dataset(self, input_dir: Path) -> Dataset:
        """Read a dataset directory written by save_dataset.

        Raises:
            StorageError: If files are missing, unreadable or of another format.
        """
        manifest = _read_json(input_dir / self.MANIFEST_FILENAME, DATASET_FORMAT)
        try:
            scenario = ScenarioConfig.from_dict(manifest["scenario"])
            k_max = int(manifest["k_max"])
            row_length = int(manifest["row_length"])
            standardization = Standardization.from_dict(manifest["standardization"])
            master_seed = int(manifest["master_seed"])
            split_info = {split: _split_info(manifest["splits"][split]) for split in SPLITS}
        except (KeyError, TypeError, ValueError) as e:
            raise StorageError(f"malformed manifest in {input_dir}: {e}") from e

        splits: dict[str, list[Sample]] = {}
        for split, (count, alphas, snrs) in split_info.items():
            path = input_dir / f"{split}.f64"
            if not path.exists():
                raise StorageError(f"missing {path}")
            with _io_errors(path):
                flat = np.frombuffer(path.read_bytes(), dtype=LITTLE_F64)
            if flat.size != count * row_length:
                raise StorageError(
                    f"{path} holds {flat.size} values, expected {count} x {row_length}"
                )
            rows = flat.astype(np.float64).reshape(count, row_length)
            splits[split] = [
                self._sample_from_row(row, scenario, k_max, alpha, snr)
                for row, alpha, snr in zip(rows, alphas, snrs, strict=True)
            ]
        return Dataset(scenario, splits, standardization, master_seed)

    @staticmethod
    def _sample_from_row(
        row: FloatArray, scenario: ScenarioConfig, k_max: int, alpha: float, snr: float | None
    ) -> Sample:
        dim = scenario.input_dim
        count = int(row[-1])
        return Sample(
            signals=row[:dim].reshape(scenario.signal_shape).copy(),
            truth=DamageSet.from_padded(row[dim : dim + 2 * k_max], count),
            alpha_used=float(alpha),
            snr_used=math.inf if snr is None else float(snr),
        )

    def save_model(self, model: ModelArtifact, output_dir: Path) -> None:
        """Write model.json and params.f64 (tensors in declared order)."""
        document = {
            "format": MODEL_FORMAT,
            "spec": model.spec.to_dict(),
            "config": model.config.to_dict(),
            "param_shapes": [list(p.shape) for p in model.params],
            "standardization": model.standardization.to_dict(),
            "history": [
                {key: encode_float(v) if isinstance(v, float) else v for key, v in entry.items()}
                for entry in model.history
            ],
            "cv": model.cv,
        }
        _write_json(output_dir / self.MODEL_FILENAME, document)
        blob = np.concatenate([p.ravel() for p in model.params]).astype(LITTLE_F64)
        path = output_dir / self.PARAMS_FILENAME
        with _io_errors(path):
            path.write_bytes(blob.tobytes())

    def load_model(self, input_dir: Path) -> ModelArtifact:
        """Read a model artifact written by save_model.

        Raises:
            StorageError: If files are missing, unreadable or malformed.
        """
        document = _read_json(input_dir / self.MODEL_FILENAME, MODEL_FORMAT)
        try:
            shapes = [tuple(int(n) for n in shape) for shape in document["param_shapes"]]
            spec = NetworkSpec.from_dict(document["spec"])
            config = TrainConfig.from_dict(document["config"])
            standardization = Standardization.from_dict(document["standardization"])
            history = list(document.get("history", []))
            cv = list(document.get("cv", []))
        except (KeyError, TypeError, ValueError) as e:
            raise StorageError(f"malformed model in {input_dir}: {e}") from e

        path = input_dir / self.PARAMS_FILENAME
        if not path.exists():
            raise StorageError(f"missing {path}")
        with _io_errors(path):
            flat = np.frombuffer(path.read_bytes(), dtype=LITTLE_F64).astype(np.float64)
        sizes = [int(np.prod(shape)) for shape in shapes]
        if flat.size != sum(sizes):
            raise StorageError(f"{path} holds {flat.size} values, expected {sum(sizes)}")
        offsets = np.cumsum([0, *sizes])
        params = [
            flat[start:stop].reshape(shape).copy()
            for start, stop, shape in zip(offsets[:-1], offsets[1:], shapes, strict=True)
        ]
        try:
            return ModelArtifact(spec, config, standardization, params, history, cv)
        except DimensionMismatch as e:
            raise StorageError(f"inconsistent model in {input_dir}: {e}") from e

    def save_report(self, report: MetricReport, output_dir: Path) -> None:
        """Write report.csv (fixed columns) and its report.json mirror."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in report.sorted_rows():
            writer.writerow([
                format_number(row.snr_db),
                format_number(row.w_distort),
                row.num_damages,
                row.method,
                format_number(row.ale),
                format_number(row.ale_std),
                format_number(row.ci95),
                format_number(row.max_var),
                format_number(row.mean_loglik),
                format_number(row.wall_time_s),
            ])
        path = output_dir / self.REPORT_CSV
        with _io_errors(path):
            output_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(buffer.getvalue(), encoding="utf-8")

        _write_json(
            output_dir / self.REPORT_JSON,
            {
                "format": REPORT_FORMAT,
                "config": report.config,
                "rows": [row.to_dict() for row in report.sorted_rows()],
            },
        )

    def load_report(self, input_dir: Path) -> MetricReport:
        """Read the JSON mirror of a report."""
        document = _read_json(input_dir / self.REPORT_JSON, REPORT_FORMAT)
        rows = [MetricRow.from_dict(row) for row in document["rows"]]
        return MetricReport(rows=rows, config=dict(document.get("config", {})))

    def save_surface(self, surface: AmbiguitySurface, stem: Path) -> None:
        """Write `<stem>.csv` (x,y,b) and `<stem>.pgm` (16-bit, min-max scaled)."""
        grid = surface.grid
        points = grid.points
        lines = ["x,y,b"]
        lines.extend(
            f"{format_number(x)},{format_number(y)},{format_number(b)}"
            for (x, y), b in zip(points, surface.values, strict=True)
        )
        csv_path = stem.with_suffix(".csv")
        pgm_path = stem.with_suffix(".pgm")
        with _io_errors(csv_path):
            stem.parent.mkdir(parents=True, exist_ok=True)
            csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        image = surface.as_image()
        low, high = float(image.min()), float(image.max())
        scaled = np.zeros_like(image) if high == low else (image - low) / (high - low)
        pixels = np.rint(scaled * PGM_MAX).astype(">u2")
        header = f"P5\n{grid.nx} {grid.ny}\n{PGM_MAX}\n".encode("ascii")
        with _io_errors(pgm_path):
            pgm_path.write_bytes(header + pixels.tobytes())

    def save_dispersion(self, table: DispersionTable, path: Path) -> None:
        """Write omega and per-mode kappa columns, one row per bin."""
        header = ",".join(["omega_rad_s", *(f"kappa_{name}" for name in table.mode_names)])
        lines = [header]
        for q, omega in enumerate(table.omega):
            values = [omega, *table.kappa[:, q]]
            lines.append(",".join(format_number(float(v)) for v in values))
        with _io_errors(path):
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def save_resolved(self, resolved: dict[str, Any], output_dir: Path) -> None:
        """Echo the resolved run configuration into an output directory."""
        _write_json(output_dir / self.RESOLVED_FILENAME, resolved)
