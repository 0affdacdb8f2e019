from pathlib import Path
from typing import Annotated

from rich.table import Table
import typer

from cli.config import __version__, exit_on_failure, get_output_dir
from cli.output import number, show
from interval_io import Report, load_interval_file, pc_intervals_frame, to_multivariate_sample, write_frame, write_report
from intervals import DEFAULT_NU, InternalModel
from symbolic_pca import run_pca


def pca(
    input: Annotated[Path, typer.Argument(help="Interval CSV with columns V_lo,V_hi per variable.")],
    model: Annotated[InternalModel, typer.Option("--model", help="Distribution of the micro-data inside each interval.")] = InternalModel.UNIFORM,
    nu: Annotated[int, typer.Option("--nu", help="Wishart degrees of freedom.")] = DEFAULT_NU,
    correlation: Annotated[bool, typer.Option("--correlation", help="Use the symbolic correlation matrix.")] = False,
    out: Annotated[Path | None, typer.Option("--out", help="Output directory (default: $IMLE_OUTPUT_DIR or ./imle-out).")] = None,
    quiet: Annotated[bool, typer.Option("--quiet", help="Skip the terminal table.")] = False,
):
    """
    Principal components of the symbolic covariance matrix, with PC intervals per observation.
    """
    with exit_on_failure():
        digest, table = load_interval_file(input)
        sample = to_multivariate_sample(table)
        result = run_pca(sample, model, nu, correlation)

        root = get_output_dir(out)
        intervals_path = write_frame(pc_intervals_frame(result, sample.labels), root, f"pca-{input.stem}")
        report = Report(
            command="pca",
            version=__version__,
            input_digest=digest,
            parameters={"input": str(input), "model": model.value, "nu": nu, "correlation": correlation},
            results=result.summary(),
        )
        summary_path = write_report(report, root, f"pca-{input.stem}", "json")

    summary = Table(title=f"Symbolic PCA (n={sample.n}, p={sample.p})")
    summary.add_column("component")
    summary.add_column("eigenvalue", justify="right")
    summary.add_column("inertia", justify="right")
    for k, (value, share) in enumerate(zip(result.eigenvalues, result.inertia), start=1):
        summary.add_row(f"PC{k}", number(value), number(share))
    show(summary, quiet=quiet)
    typer.echo(f"Reports written to {summary_path} and {intervals_path}")
