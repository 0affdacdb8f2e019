import typer
import cli.analysis
import cli.components
import cli.study
from typing import Annotated
from cli.config import __version__, setup_logging

app = typer.Typer(no_args_is_help=True)
app.command()(cli.analysis.estimate)
app.command(name="appendix-a")(cli.analysis.appendix_a)
app.command(name="reference-sets", hidden=True)(cli.analysis.appendix_a)
app.command()(cli.analysis.gradcheck)
app.command()(cli.study.simulate)
app.command()(cli.components.pca)


def version_callback(value: bool):
    if value:
        typer.echo(f"Interval MLE version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: Annotated[bool, typer.Option("--version", callback=version_callback, is_eager=True, help="Show the current app version.")] = False,
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log progress and diagnostics.")] = False,
):
    setup_logging(verbose)


if __name__ == "__main__":
    app()
