"""MFP-vs-MDN comparison sweeps over noise, distortion and damage count."""

import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, replace
from enum import Enum

from wavelocate.core.errors import InvalidParameter
from wavelocate.core.interfaces import Localizer
from wavelocate.core.models import (
    DamagePolicy,
    DamagePolicyKind,
    Dataset,
    Method,
    MetricReport,
    MetricRow,
    NetworkSpec,
    ScenarioConfig,
    TrainConfig,
)
from wavelocate.evaluation.metrics import ale, ci95_coverage, uncertainty_summaries
from wavelocate.mdn.trainer import MdnLocalizer, train, train_with_cv
from wavelocate.mfp.matched_field import MfpLocalizer
from wavelocate.wavefield.generator import generate_dataset

logger = logging.getLogger(__name__)


class ComponentsRule(Enum):
    """How many mixture components a sweep cell's network gets."""

    FIXED = "fixed"
    DAMAGES_PLUS_ONE = "damages_plus_one"


@dataclass(frozen=True)
class SweepSpec:
    """Grid of sweep cells and the methods compared on each."""

    snr_db: tuple[float, ...] = (math.inf,)
    w_distort: tuple[float, ...] = (0.0,)
    num_damages: tuple[int, ...] = (1,)
    methods: tuple[Method, ...] = (Method.MDN, Method.MFP)
    components_rule: ComponentsRule = ComponentsRule.FIXED
    damage_policy: DamagePolicyKind = DamagePolicyKind.FIXED

    def __post_init__(self) -> None:
        if not (self.snr_db and self.w_distort and self.num_damages and self.methods):
            raise InvalidParameter("sweep lists and methods must be non-empty")

    def cells(self) -> list[tuple[float, float, int]]:
        """(snr_db, w_distort, num_damages) in deterministic order."""
        return [
            (snr, w, k) for snr in self.snr_db for w in self.w_distort for k in self.num_damages
        ]


PRESETS: dict[str, SweepSpec] = {
    # ALE against sensor noise, up to two damages
    "noise": SweepSpec(
        snr_db=(-50.0, -25.0, 0.0, 5.0, 15.0, 25.0),
        w_distort=(0.15,),
        num_damages=(2,),
        damage_policy=DamagePolicyKind.UP_TO,
    ),
    # ALE, coverage, variance and likelihood against wavenumber distortion
    "uncertainty": SweepSpec(snr_db=(5.0,), w_distort=(0.0, 0.1, 0.2, 0.3), num_damages=(1,)),
    "damages": SweepSpec(
        snr_db=(5.0,),
        w_distort=(0.15,),
        num_damages=(1, 2, 3, 4),
        components_rule=ComponentsRule.DAMAGES_PLUS_ONE,
    ),
}


def evaluate_split(
    localizer: Localizer,
    dataset: Dataset,
    split: str = "test",
    likelihood_split: str | None = None,
    *,
    cell: tuple[float, float, int] | None = None,
    timing: bool = True,
) -> MetricRow:
    """Metrics of one localizer on one split.

    Args:
        localizer: Method to evaluate.
        dataset: Dataset holding the split.
        split: Split scored for ALE, coverage and variance.
        likelihood_split: Split scored for the mean log-likelihood (defaults to `split`).
        cell: (snr_db, w_distort, num_damages) key; taken from the scenario if omitted.
        timing: Record wall time (disable for bit-reproducible reports).

    Returns:
        Metric row; uncertainty columns are NaN for point-estimate methods.
    """
    scenario = dataset.scenario
    if cell is None:
        cell = (
            scenario.uncertainty.snr_db,
            scenario.uncertainty.w_distort,
            scenario.damage_policy.count,
        )
    started = time.perf_counter()
    truths = dataset.truths(split)
    predictions = localizer.predict_split(dataset, split)
    value, errors = ale(predictions, truths)
    ale_std = float(errors.std()) if errors.size else math.nan

    ci95 = max_var = mean_loglik = math.nan
    if localizer.reports_uncertainty:
        ci95 = ci95_coverage(predictions, truths)
        max_var, mean_loglik = uncertainty_summaries(predictions, truths)
        if likelihood_split and likelihood_split != split and dataset.samples(likelihood_split):
            _, mean_loglik = uncertainty_summaries(
                localizer.predict_split(dataset, likelihood_split),
                dataset.truths(likelihood_split),
            )

    snr, w, k = cell
    return MetricRow(
        snr_db=snr,
        w_distort=w,
        num_damages=k,
        method=localizer.name,
        ale=value,
        ale_std=ale_std,
        ci95=ci95,
        max_var=max_var,
        mean_loglik=mean_loglik,
        wall_time_s=time.perf_counter() - started if timing else 0.0,
    )


def run_sweep(
    template: ScenarioConfig,
    sweep: SweepSpec,
    counts: dict[str, int],
    network: NetworkSpec,
    train_config: TrainConfig,
    seed: int,
    *,
    mfp: MfpLocalizer | None = None,
    cv3: bool = False,
    threads: int | None = None,
    quiet: bool = True,
    timing: bool = True,
    config: dict[str, object] | None = None,
) -> MetricReport:
    """Generate, train and evaluate every sweep cell.

    Every cell reuses the master seed, so cells differ only in the swept
    parameters (common random numbers). Train and test data of a cell share
    its noise level and distortion.

    Args:
        template: Scenario whose uncertainty and damage policy are overridden per cell.
        sweep: Cells and methods.
        counts: Samples per split.
        network: Architecture template; input size and components are set per cell.
        train_config: Training settings.
        seed: Master seed.
        mfp: MFP localizer (default grid when omitted).
        cv3: Select dropout by 3-fold cross-validation before training.
        threads: Worker cap for generation.
        quiet: Suppress progress bars.
        timing: Record wall times.
        config: Resolved configuration stored with the report.

    Returns:
        Report with one row per cell and method.
    """
    mfp = mfp or MfpLocalizer(quiet=quiet)
    rows: list[MetricRow] = []
    for snr, w, k in sweep.cells():
        scenario = replace(
            template,
            uncertainty=replace(template.uncertainty, snr_db=snr, w_distort=w),
            damage_policy=DamagePolicy(sweep.damage_policy, k),
        )
        logger.info("sweep cell snr=%s dB, w_distort=%g, damages=%d", snr, w, k)
        dataset = generate_dataset(scenario, counts, seed, threads=threads, quiet=quiet)
        models = _CellModels(network, train_config, mfp, cv3, quiet, timing)
        rows.extend(models.evaluate(dataset, sweep, (snr, w, k)))
    return MetricReport(rows=rows, config=dict(config or {}))


@dataclass(frozen=True)
class _CellModels:
    """Per-sweep method settings applied to each cell's dataset."""

    network: NetworkSpec
    train_config: TrainConfig
    mfp: MfpLocalizer
    cv3: bool
    quiet: bool
    timing: bool

    def evaluate(
        self, dataset: Dataset, sweep: SweepSpec, cell: tuple[float, float, int]
    ) -> list[MetricRow]:
        rows: list[MetricRow] = []
        for method in _ordered(sweep.methods):
            if method is Method.MFP:
                rows.append(evaluate_split(self.mfp, dataset, cell=cell, timing=self.timing))
                continue
            components = self.network.num_components
            if sweep.components_rule is ComponentsRule.DAMAGES_PLUS_ONE:
                components = cell[2] + 1
            spec = replace(
                self.network, input_dim=dataset.scenario.input_dim, num_components=components
            )
            started = time.perf_counter()
            fit = train_with_cv if self.cv3 else train
            model = fit(dataset, spec, self.train_config, quiet=self.quiet)
            row = evaluate_split(
                MdnLocalizer(model), dataset, "test", "val", cell=cell, timing=self.timing
            )
            if self.timing:
                row = replace(row, wall_time_s=time.perf_counter() - started)
            rows.append(row)
        return rows


def _ordered(methods: Sequence[Method]) -> list[Method]:
    return sorted(set(methods), key=lambda m: m.value)
