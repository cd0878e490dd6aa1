import logging

import numpy as np
import typer
from rich.panel import Panel

from edfvae import __version__
from edfvae.core.activity import analytical_activity, empirical_activity, histogram_distance
from edfvae.core.plotting import render_histogram
from edfvae.errors import NumericalError

from .config import parse_list, prepare_output, resolve_config, write_lock
from .experiment import effective_init, fit_mle, model_family, run_seed
from .main import EXIT_NUMERIC, app, console, exit_on_error
from .report import activity_table, write_csv

logger = logging.getLogger(__name__)

ACTIVITY_HEADER = ("dim", "value", "source")
HISTOGRAM_HEADER = ("beta", "seed", "bin", "count", "source")
DISTANCE_HEADER = ("beta", "mean", "std", "n_seeds", "analytical_active", "empirical_active_mean")


@app.command()
def activity(
    config: str = typer.Option(None, "--config", "-c", help="Experiment YAML file."),
    dataset: str = typer.Option(None, "--dataset", "-d", help="Dataset URI."),
    family: str = typer.Option(None, "--family", "-f", help="gaussian | bernoulli | binomial | poisson."),
    architecture: str = typer.Option(None, "--architecture", "-a", help="deep | canonical."),
    init: str = typer.Option(None, "--init", "-i", help="bench | mle_b."),
    kappa: int = typer.Option(None, "--kappa", "-k", help="Latent dimension."),
    betas: str = typer.Option(None, "--betas", help="Comma-separated KL weights, e.g. 1,20."),
    seeds: str = typer.Option(None, "--seeds", "-s", help="Comma-separated seeds."),
    batches: int = typer.Option(None, "--batches", help="Total minibatches per seed."),
    gaussian_phi: str = typer.Option(None, "--gaussian-phi", help="'mle' or a fixed Gaussian dispersion."),
    output_dir: str = typer.Option(None, "--output", "-o", help="Output directory."),
    plot: bool = typer.Option(None, "--plot/--no-plot", help="Write one histogram SVG per β."),
):
    """🔍 Compare predicted and trained latent activity over a β sweep.

    For every β the closed-form prediction is set against the encoder-mean
    variance of each trained seed; distance.csv summarizes the histogram
    distances.

    Examples:
        edfvae activity --betas 1,20 --seeds 0,1,2
        edfvae activity -c mnist.yaml --betas 0.5,1,2,5 --plot
    """
    with exit_on_error():
        cfg = resolve_config(
            config,
            dataset=dataset,
            family=family,
            architecture=architecture,
            init=init,
            kappa=kappa,
            betas=parse_list(betas, float),
            seeds=parse_list(seeds, int),
            total_batches=batches,
            gaussian_phi=gaussian_phi,
            output_dir=output_dir,
            plot=plot,
        )
        sweep = cfg.betas or [cfg.beta]
        console.print()
        console.print(Panel.fit("🔍 [bold cyan]edfvae activity[/bold cyan]", subtitle="v" + __version__))
        with console.status(f"[bold green]Loading {cfg.dataset}..."):
            data = cfg.load_dataset()
        out = prepare_output(cfg, "activity")

        hist_rows = []
        dist_rows = []
        any_trained = False
        for beta in sweep:
            with console.status(f"[bold green]β={beta:g}: closed-form MLE..."):
                sol = fit_mle(cfg, data, beta)
            predicted = analytical_activity(sol)
            family_obj = model_family(cfg, sol)
            if effective_init(cfg.init, beta) != cfg.init:
                console.print(f"  ⚠️  [yellow]β={beta:g}: MLE-B is undefined, seeds start from He init.[/yellow]")
            hist_rows += [(beta, "", *row) for row in predicted.histogram_rows()]
            distances = []
            empirical_active = []
            last_reports = {"analytical": predicted}
            last_distances = {}
            for seed in cfg.seeds:
                with console.status(f"[bold green]β={beta:g}: training seed {seed}..."):
                    try:
                        model, _ = run_seed(cfg, data, family_obj, beta, seed, sol)
                    except NumericalError as e:
                        logger.warning("beta %g seed %d failed: %s", beta, seed, e)
                        console.print(f"  ❌ β={beta:g} seed {seed}: [red]{e}[/red]")
                        continue
                any_trained = True
                observed = empirical_activity(model, data.train)
                dist = histogram_distance(predicted.histogram, observed.histogram)
                distances.append(dist)
                empirical_active.append(observed.active_count)
                write_csv(
                    out / f"activity_beta{beta:g}_seed{seed}.csv",
                    ACTIVITY_HEADER,
                    predicted.csv_rows() + observed.csv_rows(),
                )
                hist_rows += [(beta, seed, *row) for row in observed.histogram_rows()]
                last_reports[f"empirical (seed {seed})"] = observed
                last_distances[f"empirical (seed {seed})"] = dist

            if distances:
                dist_rows.append(
                    (
                        beta,
                        float(np.mean(distances)),
                        float(np.std(distances, ddof=1)) if len(distances) > 1 else 0.0,
                        len(distances),
                        predicted.active_count,
                        float(np.mean(empirical_active)),
                    )
                )
            console.print()
            console.print(activity_table(f"β = {beta:g}", last_reports, last_distances))
            if cfg.plot:
                svg = render_histogram(
                    {name: [int(c) for c in r.histogram] for name, r in last_reports.items()},
                    title=f"{data.name}: activity histograms, β={beta:g}, κ={cfg.kappa}",
                )
                (out / f"histogram_beta{beta:g}.svg").write_text(svg, encoding="utf-8")

        if not any_trained:
            console.print("\n[red]Error:[/red] every training run failed")
            raise typer.Exit(code=EXIT_NUMERIC)
        write_csv(out / "histograms.csv", HISTOGRAM_HEADER, hist_rows)
        write_csv(out / "distance.csv", DISTANCE_HEADER, dist_rows)
        write_lock(cfg, out, "activity", {"betas": sweep})

    console.print(f"\n  🎉 Wrote [bold green]{out}[/bold green]")
