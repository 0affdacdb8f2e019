from pathlib import Path
from typing import Annotated

from rich.progress import track
import typer

from cli.config import EXIT_NUMERICAL, __version__, exit_on_failure, get_output_dir
from cli.output import g_table, show
from interval_io import Report, dump_study_config, load_study_config, study_config_from_flat, write_frame, write_report
from simulator import StudyConfig, block_count, run_study
from utils import fallback, generate_unique_path


def apply_overrides(config: StudyConfig, seed: int | None, workers: int | None, replications: int | None) -> StudyConfig:
    flat = config.to_flat()
    flat["seed"] = fallback(config.seed, seed)
    flat["workers"] = fallback(config.workers, workers)
    flat["replications"] = fallback(config.replications, replications)
    return study_config_from_flat(flat, "options")


def simulate(
    config_path: Annotated[Path, typer.Argument(metavar="CONFIG", help="Study configuration (YAML).")],
    seed: Annotated[int | None, typer.Option("--seed", help="Override the configured seed.")] = None,
    workers: Annotated[int | None, typer.Option("--workers", help="Worker processes for the replications.")] = None,
    replications: Annotated[int | None, typer.Option("--replications", "-B", help="Override the number of replications.")] = None,
    out: Annotated[Path | None, typer.Option("--out", help="Output directory (default: $IMLE_OUTPUT_DIR or ./imle-out).")] = None,
    quiet: Annotated[bool, typer.Option("--quiet", help="No progress bar or tables.")] = False,
):
    """
    Run a seeded Monte-Carlo study and write its CSV and JSON reports.
    """
    with exit_on_failure():
        config = apply_overrides(load_study_config(config_path), seed, workers, replications)
        progress = None
        if not quiet:
            progress = lambda blocks: track(blocks, total=block_count(config), description=f"Simulating {config.label}...")
        study = run_study(config, progress)

        root = get_output_dir(out)
        csv_path = write_frame(study.to_frame(), root, f"study-{config.label}")
        report = Report(
            command="simulate",
            version=__version__,
            parameters=config.to_flat(),
            results=study.to_dict(),
            notes=list(study.notes),
        )
        json_path = write_report(report, root, f"study-{config.label}", "json")
        # resolved configuration with overrides applied
        yml_path = generate_unique_path(root, f"study-{config.label}", "yml")
        yml_path.write_text(dump_study_config(config), encoding="utf-8")

    columns = [("theory", study.theoretical)] + [(f"n={cell.n}", cell.mean) for cell in study.cells]
    show(g_table(f"{config.label}: replication means (B={config.replications})", columns), quiet=quiet)
    for note in study.notes:
        typer.echo(note)
    typer.echo(f"Reports written to {csv_path}, {json_path} and {yml_path}")

    if study.failures:
        raise typer.Exit(EXIT_NUMERICAL)
