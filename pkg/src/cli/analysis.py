from dataclasses import asdict
from pathlib import Path
from typing import Annotated, Any

from rich.table import Table
import typer

from asymptotics import G_LABELS, g_plugin, negative_design_params, plugin_variances, wald_interval
from cli.config import OutputFormat, __version__, exit_on_failure
from cli.output import emit_report, g_table, mapping_table, number, show
from datasets import REFERENCE_SETS, load_reference_set
from estimators import between_mles, center_range_stats, mle_params, overall_estimates, within_mles
from interval_io import Report, load_interval_file, to_bivariate_sample
from intervals import DEFAULT_NU, InternalModel, TauParams
from likelihood import FD_RELATIVE_STEP, VARIANCE_COORDINATES, loglik_gradient, max_gradient_error
from internal_moments import realize_sample
from simulator import generate_theta_sample, replication_rng

FD_TOLERANCE = 1e-6
MLE_GRADIENT_TOLERANCE = 1e-8

ModelOption = Annotated[InternalModel, typer.Option("--model", help="Distribution of the micro-data inside each interval.")]
NuOption = Annotated[int, typer.Option("--nu", help="Wishart degrees of freedom.")]
FormatOption = Annotated[OutputFormat, typer.Option("--format", help="Report file format.")]
OutOption = Annotated[Path | None, typer.Option("--out", help="Output directory (default: $IMLE_OUTPUT_DIR or ./imle-out).")]
QuietOption = Annotated[bool, typer.Option("--quiet", help="Skip the terminal tables.")]


def _wald_block(g: Any, n: int) -> dict[str, list[float]]:
    values = g.as_dict()
    return {
        label: list(wald_interval(values[label], values[f"nVar({label})"] / n))
        for label in G_LABELS[::2]
    }


def estimate(
    input: Annotated[Path, typer.Argument(help="Interval CSV with columns X_lo,X_hi,Y_lo,Y_hi[,X_mode,Y_mode].")],
    model: ModelOption = InternalModel.UNIFORM,
    nu: NuOption = DEFAULT_NU,
    format: FormatOption = OutputFormat.JSON,
    out: OutOption = None,
    quiet: QuietOption = False,
):
    """
    Estimate means, variances and the covariance of a bivariate interval sample.
    """
    with exit_on_failure():
        digest, table = load_interval_file(input)
        sample = to_bivariate_sample(table)
        overall = overall_estimates(sample, model, nu)
        thetas = realize_sample(sample, model)
        between = between_mles(thetas)
        within = within_mles(thetas, nu)
        g = g_plugin(sample, model, nu)
        variances = plugin_variances(sample, model, nu)
        center_range = center_range_stats(sample)

    notes = []
    if model is InternalModel.PERT and not all(
        obs.mode_x is not None and obs.mode_y is not None for obs in sample.observations
    ):
        notes.append("pert: observations without modes use the interval midpoint as mode")
    if not between.rho_defined:
        notes.append("between variance is zero, rho is undefined")

    report = Report(
        command="estimate",
        version=__version__,
        input_digest=digest,
        parameters={"input": str(input), "model": model.value, "nu": nu, "variables": list(table.variables)},
        results={
            "n": sample.n,
            "overall": asdict(overall),
            "between": {**asdict(between), "rho_status": between.rho_status.value},
            "within": asdict(within),
            "asymptotic": g.as_dict(),
            "asymptotic_variances": variances.as_dict(),
            "wald_95": _wald_block(g, sample.n),
            "center_range": asdict(center_range),
        },
        notes=notes,
    )

    show(
        mapping_table("Overall moments", {k: v for k, v in asdict(overall).items() if not isinstance(v, dict)}),
        g_table(f"Estimates and n-scaled variances (n={sample.n})", [("value", g)]),
        _center_range_table("Center/range comparison", center_range),
        quiet=quiet,
    )
    for note in notes:
        typer.echo(note)
    emit_report(report, out, format, f"estimate-{input.stem}")


def _center_range_table(title: str, stats) -> Table:
    table = Table(title=title)
    for header in ("", "center", "range", "sum", "symbolic"):
        table.add_column(header, justify="right")
    for name in ("x", "y", "xy"):
        row = getattr(stats, name)
        table.add_row(name, number(row.center, 3), number(row.range, 3), number(row.combined, 3), number(row.symbolic, 3))
    return table


def appendix_a(
    format: FormatOption = OutputFormat.JSON,
    out: OutOption = None,
    save: Annotated[bool, typer.Option("--save", help="Also write the report file.")] = False,
):
    """
    Print variances and covariances of the embedded data sets next to center and range statistics.
    """
    variances = Table(title="(a) Variances of Y")
    covariances = Table(title="(b) Covariances of (Y, X)")
    for table, headers in (
        (variances, ("Var(Yc)", "Var(Yr)", "sum", "Var(Y)")),
        (covariances, ("Cov(c)", "Cov(r)", "sum", "Cov")),
    ):
        table.add_column("set")
        for header in headers:
            table.add_column(header, justify="right")

    results: dict[str, Any] = {"variances": {}, "covariances": {}}
    with exit_on_failure():
        for k in sorted(REFERENCE_SETS):
            stats = center_range_stats(load_reference_set(k))
            for table, key, row in ((variances, "variances", stats.y), (covariances, "covariances", stats.xy)):
                values = (row.center, row.range, row.combined, row.symbolic)
                table.add_row(str(k), *(number(v, 3) for v in values))
                results[key][str(k)] = asdict(row)

    show(variances, covariances)
    if save:
        report = Report(command="appendix-a", version=__version__, results=results)
        emit_report(report, out, format, "appendix-a")


def parse_params(text: str, base: TauParams) -> TauParams:
    """Applies comma-separated key=value overrides, e.g. "rho=0.5,gamma3=-1"."""
    changes: dict[str, Any] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in TauParams.model_fields:
            raise typer.BadParameter(f"'{item}' is not of the form name=value with name in {', '.join(TauParams.model_fields)}")
        try:
            changes[key] = int(value) if key == "nu" else float(value)
        except ValueError:
            raise typer.BadParameter(f"'{value}' is not a number")
    return base.replace(**changes)


def gradcheck(
    input: Annotated[Path | None, typer.Argument(help="Interval CSV to realize as theta data.")] = None,
    synthetic: Annotated[bool, typer.Option("--synthetic", help="Draw theta data from the model instead of reading a file.")] = False,
    params: Annotated[str | None, typer.Option("--params", help="Parameter overrides as name=value pairs, e.g. rho=0.5,gamma3=-1.")] = None,
    n: Annotated[int, typer.Option("--n", help="Synthetic sample size.")] = 50,
    seed: Annotated[int, typer.Option("--seed", help="Seed of the synthetic stream.")] = 0,
    model: ModelOption = InternalModel.UNIFORM,
    nu: NuOption = DEFAULT_NU,
    format: FormatOption = OutputFormat.JSON,
    out: OutOption = None,
    save: Annotated[bool, typer.Option("--save", help="Also write the report file.")] = False,
):
    """
    Compare the analytic likelihood gradient with finite differences and check it vanishes at the MLE.
    """
    if (input is None) == (not synthetic):
        raise typer.BadParameter("Give either an input file or --synthetic")

    digest = None
    with exit_on_failure():
        point = negative_design_params().replace(nu=nu)
        if params is not None:
            point = parse_params(params, point)
        if synthetic:
            thetas = generate_theta_sample(n, point, replication_rng(seed, n, 0))
        else:
            digest, table = load_interval_file(input)
            thetas = realize_sample(to_bivariate_sample(table), model)
            if params is None:
                point = mle_params(thetas, nu)
        error = max_gradient_error(thetas, point)
        gradient = loglik_gradient(thetas, point).in_variance_coordinates(point)
        at_mle = loglik_gradient(thetas, mle_params(thetas, point.nu)).max_abs

    size = thetas.n
    results = {
        "n": size,
        "max_relative_error": error,
        "relative_error_tolerance": FD_TOLERANCE,
        "max_abs_gradient_at_mle": at_mle,
        "gradient_tolerance": MLE_GRADIENT_TOLERANCE * size,
        "fd_relative_step": FD_RELATIVE_STEP,
        "passed": error < FD_TOLERANCE and at_mle < MLE_GRADIENT_TOLERANCE * size,
    }
    show(mapping_table("Gradient check", results))
    if save:
        report = Report(
            command="gradcheck",
            version=__version__,
            input_digest=digest,
            parameters={"point": point.model_dump(), "seed": seed if synthetic else None, "model": model.value},
            results={**results, "gradient": dict(zip(VARIANCE_COORDINATES, gradient.tolist()))},
        )
        emit_report(report, out, format, "gradcheck")
