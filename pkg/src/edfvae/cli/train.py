import logging

import typer
from rich.panel import Panel
from rich.table import Table as RichTable

from edfvae import __version__
from edfvae.core.plotting import CurveSeries, ReferenceLine, render_curves
from edfvae.errors import NumericalError
from edfvae.nn import save_checkpoint
from edfvae.nn.training import HISTORY_HEADER, TrainHistory

from .config import parse_list, prepare_output, resolve_config, write_lock
from .experiment import effective_init, fit_mle, model_family, reference_values, run_seed
from .main import EXIT_NUMERIC, app, console, exit_on_error
from .report import AGGREGATE_HEADER, aggregate_histories, fmt, write_csv

logger = logging.getLogger(__name__)


def _curve_series(rows: list[tuple]) -> list[CurveSeries]:
    series = []
    for split in ("train", "test"):
        picked = [r for r in rows if r[1] == split]
        if not picked:
            continue
        series.append(
            CurveSeries(
                label=split,
                x=[float(r[0]) for r in picked],
                mean=[r[2] for r in picked],
                lower=[r[3] for r in picked],
                upper=[r[4] for r in picked],
                dashed=split == "test",
            )
        )
    return series


@app.command()
def train(
    config: str = typer.Option(None, "--config", "-c", help="Experiment YAML file."),
    dataset: str = typer.Option(None, "--dataset", "-d", help="Dataset URI."),
    family: str = typer.Option(None, "--family", "-f", help="gaussian | bernoulli | binomial | poisson."),
    architecture: str = typer.Option(None, "--architecture", "-a", help="deep | canonical."),
    init: str = typer.Option(None, "--init", "-i", help="bench | mle_b."),
    kappa: int = typer.Option(None, "--kappa", "-k", help="Latent dimension."),
    beta: float = typer.Option(None, "--beta", "-b", help="KL weight."),
    seeds: str = typer.Option(None, "--seeds", "-s", help="Comma-separated seeds, e.g. 0,1,2."),
    batches: int = typer.Option(None, "--batches", help="Total minibatches per seed."),
    eval_every: int = typer.Option(None, "--eval-every", help="Evaluate every N minibatches."),
    hidden_scale: float = typer.Option(None, "--hidden-scale", help="Multiplier on hidden widths."),
    output_dir: str = typer.Option(None, "--output", "-o", help="Output directory."),
    plot: bool = typer.Option(None, "--plot/--no-plot", help="Write curves.svg."),
):
    """🏋️ Train a VAE per seed and aggregate the ELBO curves.

    With --init mle_b the decoder starts at the closed-form MLE. The dashed
    reference lines in curves.svg are L̂ and L̂ + E[R₂] at that MLE.

    Examples:
        edfvae train --init mle_b --seeds 0,1,2 --plot
        edfvae train -c experiment.yaml --architecture deep --init bench
    """
    with exit_on_error():
        cfg = resolve_config(
            config,
            dataset=dataset,
            family=family,
            architecture=architecture,
            init=init,
            kappa=kappa,
            beta=beta,
            seeds=parse_list(seeds, int),
            total_batches=batches,
            eval_every=eval_every,
            hidden_scale=hidden_scale,
            output_dir=output_dir,
            plot=plot,
        )
        console.print()
        console.print(Panel.fit("🏋️ [bold cyan]edfvae train[/bold cyan]", subtitle="v" + __version__))
        with console.status(f"[bold green]Loading {cfg.dataset}..."):
            data = cfg.load_dataset()
        console.print(f"  ✅ Loaded [cyan]{data.name}[/cyan]: {data.sizes[0]} train / {data.sizes[1]} test rows")

        sol = None
        refs = None
        if cfg.init == "mle_b" or (cfg.family == "gaussian" and cfg.estimate_dispersion):
            with console.status("[bold green]Solving the closed-form MLE..."):
                sol = fit_mle(cfg, data, cfg.beta)
                refs = reference_values(sol, data.train)
        family_obj = model_family(cfg, sol)
        out = prepare_output(cfg, "train")
        if effective_init(cfg.init, cfg.beta) != cfg.init:
            console.print("  ⚠️  [yellow]MLE-B is undefined at β=0; every seed starts from He init.[/yellow]")

        histories: list[TrainHistory] = []
        failed: list[int] = []
        for seed in cfg.seeds:
            with console.status(f"[bold green]Training seed {seed} ({cfg.total_batches} batches)..."):
                try:
                    model, history = run_seed(cfg, data, family_obj, cfg.beta, seed, sol)
                except NumericalError as e:
                    logger.warning("seed %d failed: %s", seed, e)
                    console.print(f"  ❌ Seed {seed}: [red]{e}[/red]")
                    failed.append(seed)
                    continue
            write_csv(out / f"history_seed{seed}.csv", HISTORY_HEADER, history.csv_rows())
            save_checkpoint(model, out / f"model_seed{seed}.bin")
            histories.append(history)
            final = history.records[-1]
            console.print(f"  ✅ Seed {seed}: final {final.split} ELBO [cyan]{final.elbo:.4f}[/cyan]")

        if not histories:
            console.print(f"\n[red]Error:[/red] every seed failed ({', '.join(map(str, failed))})")
            raise typer.Exit(code=EXIT_NUMERIC)

        rows = aggregate_histories(histories)
        comments = []
        if refs is not None:
            comments = [
                f"objective_hat={fmt(refs.objective_hat)}",
                f"objective_hat_plus_remainder={fmt(refs.upper)}",
            ]
        write_csv(out / "aggregate.csv", AGGREGATE_HEADER, rows, comments=comments)
        if cfg.plot:
            references = []
            if refs is not None:
                references = [ReferenceLine("L̂", refs.objective_hat), ReferenceLine("L̂ + E[R₂]", refs.upper)]
            svg = render_curves(
                _curve_series(rows),
                title=f"{data.name}: {cfg.architecture}/{cfg.init}, β={cfg.beta:g}, κ={cfg.kappa}",
                references=references,
            )
            (out / "curves.svg").write_text(svg, encoding="utf-8")
        write_lock(cfg, out, "train", {"failed_seeds": failed})

    table = RichTable(title="📈 ELBO at the last evaluation")
    table.add_column("Split", style="cyan")
    table.add_column("Batch", justify="right")
    table.add_column("Mean", justify="right", style="green")
    table.add_column("95% CI", justify="right")
    table.add_column("Seeds", justify="right")
    last = max(r[0] for r in rows)
    for batch, split, mean, lo, hi, n in rows:
        if batch == last:
            table.add_row(split, str(batch), f"{mean:.4f}", f"[{lo:.4f}, {hi:.4f}]", str(n))
    console.print()
    console.print(table)
    if refs is not None:
        console.print(f"  L̂ = [cyan]{refs.objective_hat:.4f}[/cyan], L̂ + E[R₂] = [cyan]{refs.upper:.4f}[/cyan]")
    console.print(f"\n  🎉 Wrote [bold green]{out}[/bold green]")
