import logging
from contextlib import contextmanager

import typer
from rich.console import Console
from rich.logging import RichHandler

from edfvae import __version__
from edfvae.errors import (
    ConfigError,
    DataFormatError,
    DomainError,
    EdfVaeError,
    NumericalError,
    SolverPreconditionError,
)

app = typer.Typer(
    name="edfvae",
    help="Closed-form analysis and training of β-VAEs with exponential-family decoders.",
    add_completion=False,
    no_args_is_help=True,
)
console = Console()

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


@app.callback(invoke_without_command=True)
def main(
    version: bool = typer.Option(
        False, "--version", "-V", help="Show version and exit."
    ),
    verbose: bool = typer.Option(
        False, "--verbose", "-v", help="Log solver and training progress."
    ),
):
    """edfvae — predict posterior collapse in closed form, then check it by training."""
    if version:
        console.print(f"edfvae version: [cyan]{__version__}[/cyan]")
        raise typer.Exit()
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


@contextmanager
def exit_on_error():
    """Print library errors the CLI way and exit with 2 (input) or 3 (numeric)."""
    try:
        yield
    except (ConfigError, DataFormatError, DomainError, FileNotFoundError) as e:
        console.print(f"\n[red]Error:[/red] {e}")
        raise typer.Exit(code=EXIT_CONFIG) from e
    except (SolverPreconditionError, NumericalError) as e:
        console.print(f"\n[red]Error:[/red] {e}")
        raise typer.Exit(code=EXIT_NUMERIC) from e
    except EdfVaeError as e:
        console.print(f"\n[red]Error:[/red] {e}")
        raise typer.Exit(code=1) from e
