from contextlib import contextmanager
from enum import Enum
import logging
import os
from pathlib import Path
from typing import Iterator

from rich.console import Console
from rich.logging import RichHandler
from rich.text import Text
import typer

from errors import NumericalFailure, ValidationFailure

APP_NAME = "imle"
OUTPUT_DIR_ENV = "IMLE_OUTPUT_DIR"

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

__version__ = "0.1.0"
console = Console()


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def get_output_dir(override: Path | None = None) -> Path:
    if override is not None:
        return override.expanduser().resolve()
    return Path(os.environ.get(OUTPUT_DIR_ENV, f"./{APP_NAME}-out")).expanduser().resolve()


def setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def fail(message: str, code: int):
    console.print(Text(message, style="red"))
    raise typer.Exit(code)


@contextmanager
def exit_on_failure() -> Iterator[None]:
    """Turns domain failures into a red message and the matching exit code."""
    try:
        yield
    except ValidationFailure as e:
        fail(str(e), EXIT_VALIDATION)
    except NumericalFailure as e:
        fail(str(e), EXIT_NUMERICAL)
    except OSError as e:
        fail(f"{e.strerror or e}: {e.filename}" if e.filename else str(e), EXIT_IO)
