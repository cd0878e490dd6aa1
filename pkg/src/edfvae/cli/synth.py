from pathlib import Path

import typer

from edfvae.data import synthetic_bernoulli, synthetic_gaussian, write_idx
from edfvae.data.idx import MNIST_FILES
from edfvae.errors import ConfigError

from .main import app, console, exit_on_error
from .report import write_csv

FORMATS = ("csv", "idx")


@app.command()
def synth(
    output_dir: str = typer.Option("data/synthetic", "--output", "-o", help="Directory for the generated files."),
    n: int = typer.Option(10_000, "--n", help="Number of rows before the split."),
    d: int = typer.Option(200, "--d", help="Observation dimension."),
    seed: int = typer.Option(0, "--seed", help="Generator seed."),
    test_fraction: float = typer.Option(0.33, "--test-fraction", help="Share of rows kept for the test split."),
    gaussian: bool = typer.Option(False, "--gaussian", help="Gaussian low-rank data instead of Bernoulli factors."),
    fmt: str = typer.Option("csv", "--format", help="csv | idx (idx only for binary data)."),
):
    """🎲 Write a synthetic dataset to disk.

    Produces train.csv and test.csv (headerless), which the ``csv`` loader
    reads back with ``test_path``. With ``--format idx`` the files carry the
    MNIST names, so the directory itself is a valid ``--dataset``.

    Examples:
        edfvae synth
        edfvae synth --gaussian --n 1000 --d 10 -o data/gauss
    """
    with exit_on_error():
        if fmt not in FORMATS:
            raise ConfigError(f"Unknown format '{fmt}'. Valid: {', '.join(FORMATS)}")
        if gaussian:
            if fmt == "idx":
                raise ConfigError("idx output holds bytes in [0, 255]; use csv for Gaussian data")
            data = synthetic_gaussian(n=n, d=d, seed=seed, test_fraction=test_fraction)
        else:
            data = synthetic_bernoulli(n=n, d=d, seed=seed, test_fraction=test_fraction)
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for split, x in (("train", data.train), ("test", data.test)):
            if not len(x):
                continue
            if fmt == "csv":
                path = write_csv(out / f"{split}.csv", None, x.tolist())
            else:
                path = out / f"{MNIST_FILES[split][0]}.gz"
                write_idx(path, (x * 255).astype("uint8"))
            written.append(path.name)

    console.print(f"  ✅ {data.name}: {data.sizes[0]} train / {data.sizes[1]} test rows, d={data.d}")
    console.print(f"  🎉 Wrote [bold green]{out}[/bold green] ({', '.join(written)})")
