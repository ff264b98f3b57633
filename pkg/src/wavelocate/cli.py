"""Command-line interface: dispersion, simulate, train and eval."""

import math
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Annotated

import typer
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from wavelocate import __version__
from wavelocate.core.config import RunConfig
from wavelocate.core.errors import ConfigError, WavelocateError
from wavelocate.core.logs import configure_logging, stderr_console
from wavelocate.core.models import SPLITS, Dataset, Method, MetricReport, QueryGrid
from wavelocate.dispersion.factory import build_table
from wavelocate.evaluation.metrics import density_surface
from wavelocate.evaluation.sweep import evaluate_split, run_sweep
from wavelocate.mdn.trainer import MdnLocalizer, predict_batch, train, train_with_cv
from wavelocate.mfp.matched_field import MfpLocalizer
from wavelocate.storage.filesystem import FilesystemStorage, format_number
from wavelocate.wavefield.generator import generate_dataset, mean_realized_snr

console = stderr_console

ConfigOption = Annotated[
    Path | None,
    typer.Option("-c", "--config", help="TOML run configuration [default: built-in defaults]"),
]
SeedOption = Annotated[
    int | None,
    typer.Option("-s", "--seed", min=0, max=2**64 - 1, help="Master seed (overrides the config)"),
]
ThreadsOption = Annotated[
    int | None,
    typer.Option("-t", "--threads", min=1, help="Worker cap [default: available parallelism]"),
]


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"[bold]wavelocate[/bold] version {__version__}")
        raise typer.Exit()


@contextmanager
def _reported_errors() -> Iterator[None]:
    """Turn library errors into a red one-line message and the error's exit code."""
    try:
        yield
    except WavelocateError as e:
        console.print(f"[red]Error: {escape(str(e))}[/red]", soft_wrap=True, highlight=False)
        raise typer.Exit(e.exit_code) from e
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted.[/yellow]")
        raise typer.Exit(1) from None


def _load_config(path: Path | None, seed: int | None, threads: int | None) -> RunConfig:
    config = RunConfig.load(path, seed)
    if threads is not None:
        values = dict(config.values)
        values["io"] = {**values["io"], "threads": threads}
        config = RunConfig(values)
    return config


def _header(command: str, rows: dict[str, object]) -> None:
    body = "\n".join(f"[bold cyan]{key}:[/bold cyan] {value}" for key, value in rows.items())
    console.print(Panel(body, title=f"[bold]wavelocate {command}[/bold]", border_style="blue"))


def _report_table(report: MetricReport) -> Table:
    table = Table(title="[bold]Localization metrics[/bold]", header_style="bold cyan")
    for column in ("snr_db", "w_distort", "damages", "method", "ale", "ci95", "max_var", "loglik"):
        table.add_column(column, justify="right")
    for row in report.sorted_rows():
        table.add_row(
            format_number(row.snr_db),
            f"{row.w_distort:g}",
            str(row.num_damages),
            row.method,
            _cell(row.ale, ".4f"),
            _cell(row.ci95, ".3f"),
            _cell(row.max_var, ".3g"),
            _cell(row.mean_loglik, ".3f"),
        )
    return table


def _cell(value: float, spec: str) -> str:
    return "-" if math.isnan(value) else format(value, spec)


def _parse_methods(text: str | None, default: tuple[Method, ...]) -> tuple[Method, ...]:
    if text is None:
        return default
    try:
        methods = tuple(Method(name.strip()) for name in text.split(",") if name.strip())
    except ValueError:
        raise ConfigError(f"--methods must list mfp and/or mdn, got {text!r}") from None
    if not methods:
        raise ConfigError("--methods must name at least one method")
    return methods


app = typer.Typer(
    name="wavelocate",
    help="Uncertainty-aware Lamb-wave damage localization (MFP and MDN).",
    add_completion=False,
    rich_markup_mode="rich",
    no_args_is_help=True,
)


@app.callback()
def callback(
    version: Annotated[
        bool,
        typer.Option(
            "-V",
            "--version",
            callback=version_callback,
            is_eager=True,
            help="Show version and exit",
        ),
    ] = False,
) -> None:
    """Synthesize plate data, train localizers and compare them.

    Logging verbosity on standard error follows WAVELOCATE_LOG (error, info, debug).
    """
    with _reported_errors():
        configure_logging()


@app.command()
def dispersion(
    config_path: ConfigOption = None,
    out: Annotated[
        Path, typer.Option("-o", "--out", help="Output CSV path")
    ] = Path("dispersion.csv"),
) -> None:
    """Solve the plate's dispersion relation and write it as CSV.

    \b
    Examples:
        wavelocate dispersion -o dispersion.csv
        wavelocate dispersion -c run.toml -o tables/aluminium.csv
    """
    with _reported_errors():
        config = RunConfig.load(config_path)
        table = build_table(config.dispersion_spec(), config.material(), config.grid())
        storage = FilesystemStorage()
        storage.save_dispersion(table, out)
        storage.save_resolved(config.resolved(), out.parent)
        _header(
            "dispersion",
            {
                "Model": config.dispersion_spec().model,
                "Modes": f"{table.num_modes} ({', '.join(table.mode_names)})",
                "Bins": table.grid.num_points,
                "Output": out,
            },
        )


@app.command()
def simulate(
    config_path: ConfigOption = None,
    seed: SeedOption = None,
    out: Annotated[Path, typer.Option("-o", "--out", help="Dataset directory")] = Path("dataset"),
    threads: ThreadsOption = None,
) -> None:
    """Generate a train/val/test dataset of multistatic scatter signals.

    \b
    Examples:
        wavelocate simulate -s 7 -o data/
        wavelocate simulate -c run.toml -s 7 -o data/ -t 4
    """
    with _reported_errors():
        config = _load_config(config_path, seed, threads)
        master_seed = config.require_seed()
        scenario = config.scenario(master_seed)
        dataset = generate_dataset(
            scenario,
            config.counts,
            master_seed,
            threads=config.threads,
            quiet=config.quiet,
        )
        storage = FilesystemStorage()
        storage.save_dataset(dataset, out)
        storage.save_resolved(config.resolved(), out)

        table = Table(title="[bold]Dataset[/bold]", header_style="bold cyan")
        table.add_column("Split", style="cyan")
        table.add_column("Samples", justify="right")
        table.add_column("Mean realized SNR (dB)", justify="right")
        for split in SPLITS:
            samples = dataset.samples(split)
            table.add_row(split, str(len(samples)), format_number(mean_realized_snr(samples)))
        console.print(table)
        console.print(f"[dim]Output: {out}[/dim]")


@app.command("train")
def train_command(
    dataset_dir: Annotated[Path, typer.Argument(help="Dataset directory from `simulate`")],
    config_path: ConfigOption = None,
    seed: SeedOption = None,
    out: Annotated[Path, typer.Option("-o", "--out", help="Model directory")] = Path("model"),
    threads: ThreadsOption = None,
    cv3: Annotated[
        bool,
        typer.Option("--cv3", help="Select dropout by 3-fold cross-validation first"),
    ] = False,
) -> None:
    """Train a mixture density network on a dataset's train split.

    \b
    Examples:
        wavelocate train data/ -s 7 -o model/
        wavelocate train data/ -c run.toml -s 7 --cv3
    """
    with _reported_errors():
        config = _load_config(config_path, seed, threads)
        storage = FilesystemStorage()
        dataset = storage.load_dataset(dataset_dir)
        spec = config.network_spec(dataset.scenario.input_dim)
        fit = train_with_cv if cv3 else train
        model = fit(dataset, spec, config.train_config(), quiet=config.quiet)
        storage.save_model(model, out)
        storage.save_resolved(config.resolved(), out)

        final = model.history[-1] if model.history else {}
        rows: dict[str, object] = {
            "Architecture": " -> ".join(str(n) for n in spec.layer_sizes),
            "Components": spec.num_components,
            "Dropout": f"{model.spec.dropout:g}",
            "Epochs": len(model.history),
            "Final train NLL": _fmt(final.get("train_nll")),
            "Final val NLL": _fmt(final.get("val_nll")),
            "Output": out,
        }
        if model.cv:
            rows["CV folds"] = len(model.cv)
        _header("train", rows)


def _fmt(value: object) -> str:
    return f"{value:.4f}" if isinstance(value, float) else "-"


@app.command("eval")
def eval_command(
    config_path: ConfigOption = None,
    seed: SeedOption = None,
    out: Annotated[Path, typer.Option("-o", "--out", help="Report directory")] = Path("report"),
    threads: ThreadsOption = None,
    model_dir: Annotated[
        Path | None, typer.Option("-m", "--model", help="Model directory from `train`")
    ] = None,
    dataset_dir: Annotated[
        Path | None, typer.Option("-d", "--dataset", help="Dataset directory from `simulate`")
    ] = None,
    sweep: Annotated[
        bool,
        typer.Option("--sweep", help="Run the configured sweep instead of one dataset"),
    ] = False,
    methods: Annotated[
        str | None,
        typer.Option("--methods", help="Comma-separated methods: mfp, mdn [default: config]"),
    ] = None,
    export_surfaces: Annotated[
        int,
        typer.Option(
            "--export-surfaces",
            min=0,
            help="Write the first N test-sample surfaces (CSV + PGM)",
        ),
    ] = 0,
    cv3: Annotated[
        bool,
        typer.Option("--cv3", help="Sweep only: cross-validate dropout in every cell"),
    ] = False,
) -> None:
    """Evaluate MFP and MDN on a dataset, or run a comparison sweep.

    \b
    Examples:
        wavelocate eval -m model/ -d data/ -o report/
        wavelocate eval -d data/ --methods mfp --export-surfaces 5
        wavelocate eval -c sweep.toml -s 7 --sweep -o sweep/
    """
    with _reported_errors():
        config = _load_config(config_path, seed, threads)
        selected = _parse_methods(methods, config.methods)
        storage = FilesystemStorage()
        mfp = MfpLocalizer(**config.mfp_options(), threads=config.threads, quiet=config.quiet)

        if sweep:
            report = _run_configured_sweep(config, selected, mfp, cv3)
        else:
            if dataset_dir is None:
                raise ConfigError("eval needs --dataset DIR (or --sweep)")
            dataset = storage.load_dataset(dataset_dir)
            if Method.MDN in selected and model_dir is None:
                raise ConfigError("evaluating mdn needs --model DIR")
            mdn = MdnLocalizer(storage.load_model(model_dir)) if model_dir else None
            rows = []
            for method in sorted(set(selected), key=lambda m: m.value):
                if method is Method.MFP:
                    rows.append(evaluate_split(mfp, dataset, "test"))
                elif mdn is not None:
                    rows.append(evaluate_split(mdn, dataset, "test", "val"))
            report = MetricReport(rows=rows, config=config.resolved())
            if export_surfaces:
                _export_surfaces(storage, dataset, mfp, mdn, selected, export_surfaces, out)

        storage.save_report(report, out)
        storage.save_resolved(config.resolved(), out)
        console.print(_report_table(report))
        console.print(f"[dim]Output: {out}[/dim]")


def _run_configured_sweep(
    config: RunConfig, methods: tuple[Method, ...], mfp: MfpLocalizer, cv3: bool
) -> MetricReport:
    master_seed = config.require_seed()
    spec = replace(config.sweep_spec(), methods=methods)
    template = config.scenario(master_seed)
    return run_sweep(
        template,
        spec,
        config.counts,
        config.network_spec(template.input_dim),
        config.train_config(),
        master_seed,
        mfp=mfp,
        cv3=cv3,
        threads=config.threads,
        quiet=config.quiet,
        config=config.resolved(),
    )


def _export_surfaces(
    storage: FilesystemStorage,
    dataset: Dataset,
    mfp: MfpLocalizer,
    mdn: MdnLocalizer | None,
    methods: tuple[Method, ...],
    count: int,
    out: Path,
) -> None:
    """MFP ambiguity surfaces and MDN density rasters of the first test samples."""
    surfaces_dir = out / "surfaces"
    if Method.MFP in methods:
        for i, surface in enumerate(mfp.surfaces(dataset, "test", count)):
            storage.save_surface(surface, surfaces_dir / f"mfp_{i:04d}")
    if mdn is not None and Method.MDN in methods:
        scenario = dataset.scenario
        grid = QueryGrid(scenario.length, scenario.width, mfp.grid_shape[0], mfp.grid_shape[1])
        raw = dataset.raw_signals("test")[:count]
        for i, prediction in enumerate(predict_batch(mdn.model, raw)):
            storage.save_surface(density_surface(prediction, grid), surfaces_dir / f"mdn_{i:04d}")


def main() -> None:
    """Main entry point."""
    app()


if __name__ == "__main__":
    main()
