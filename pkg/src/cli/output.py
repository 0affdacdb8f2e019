from pathlib import Path
from typing import Iterable

from rich.table import Table
import typer

from asymptotics import GVector
from cli.config import OutputFormat, console, get_output_dir
from interval_io import Report, write_report


def number(value: float, digits: int = 4) -> str:
    return f"{value:.{digits}f}"


def g_table(title: str, columns: Iterable[tuple[str, GVector]]) -> Table:
    columns = list(columns)
    table = Table(title=title)
    table.add_column("component")
    for header, _ in columns:
        table.add_column(header, justify="right")
    labels = list(columns[0][1].as_dict()) if columns else []
    for label in labels:
        table.add_row(label, *(number(g.as_dict()[label]) for _, g in columns))
    return table


def mapping_table(title: str, values: dict[str, float]) -> Table:
    table = Table(title=title, show_header=False)
    for key, value in values.items():
        table.add_row(key, number(value) if isinstance(value, float) else str(value))
    return table


def emit_report(report: Report, out: Path | None, fmt: OutputFormat, stem: str) -> Path:
    path = write_report(report, get_output_dir(out), stem, fmt.value)
    typer.echo(f"Report written to {path}")
    return path


def show(*tables: Table, quiet: bool = False):
    if quiet:
        return
    for table in tables:
        console.print(table)
