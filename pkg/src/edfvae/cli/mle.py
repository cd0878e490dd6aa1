import typer
from rich.panel import Panel

from edfvae import __version__

from .config import prepare_output, resolve_config, write_lock
from .experiment import fit_mle, reference_values
from .main import app, console, exit_on_error
from .report import fmt, mle_table, write_csv


@app.command()
def mle(
    config: str = typer.Option(None, "--config", "-c", help="Experiment YAML file."),
    dataset: str = typer.Option(None, "--dataset", "-d", help="Dataset URI, e.g. synthetic://?n=10000&d=200."),
    family: str = typer.Option(None, "--family", "-f", help="gaussian | bernoulli | binomial | poisson."),
    kappa: int = typer.Option(None, "--kappa", "-k", help="Latent dimension."),
    beta: float = typer.Option(None, "--beta", "-b", help="KL weight."),
    output_dir: str = typer.Option(None, "--output", "-o", help="Output directory."),
    gaussian_phi: str = typer.Option(None, "--gaussian-phi", help="'mle' or a fixed Gaussian dispersion."),
    trials_n: int = typer.Option(None, "--trials-n", help="Binomial trial count."),
    allow_raw: bool = typer.Option(None, "--allow-raw/--unit-range", help="Accept CSV values outside [0, 1]."),
):
    """📐 Fit the closed-form affine-decoder MLE and predict latent activity.

    Writes mle.csv, mle.bin and lhat.txt.

    Examples:
        edfvae mle --dataset synthetic:// --kappa 2 --beta 1
        edfvae mle -c experiment.yaml --beta 20
    """
    with exit_on_error():
        cfg = resolve_config(
            config,
            dataset=dataset,
            family=family,
            kappa=kappa,
            beta=beta,
            output_dir=output_dir,
            gaussian_phi=gaussian_phi,
            trials_n=trials_n,
            allow_raw=allow_raw,
        )
        console.print()
        console.print(Panel.fit("📐 [bold cyan]edfvae mle[/bold cyan]", subtitle="v" + __version__))

        with console.status(f"[bold green]Loading {cfg.dataset}..."):
            data = cfg.load_dataset()
        n_train, n_test = data.sizes
        console.print(f"  ✅ Loaded [cyan]{data.name}[/cyan]: {n_train} train / {n_test} test rows, d={data.d}")

        with console.status("[bold green]Solving for Ŵ, b̂..."):
            sol = fit_mle(cfg, data, cfg.beta)
            refs = reference_values(sol, data.train)

        out = prepare_output(cfg, "mle")
        write_csv(out / "mle.csv", ("quantity", "index", "value"), sol.csv_rows())
        sol.save(out / "mle.bin")
        lines = []
        if refs is None:
            lines.append("objective_hat undefined for beta=0")
        else:
            lines.append(f"objective_hat {fmt(refs.objective_hat)}")
            lines.append(f"expected_remainder {fmt(refs.expected_remainder)}")
            lines.append(f"objective_hat_plus_remainder {fmt(refs.upper)}")
        (out / "lhat.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        write_lock(cfg, out, "mle", {"active_count": sol.active_count})

    console.print()
    console.print(mle_table(sol))
    for warning in sol.warnings:
        console.print(f"  ⚠️  [yellow]{warning}[/yellow]")
    if sol.sigma2_hat is not None:
        console.print(f"  σ̂² = [cyan]{sol.sigma2_hat:.6g}[/cyan]")
    if refs is not None:
        console.print(f"  L̂ = [cyan]{refs.objective_hat:.6g}[/cyan]")
        console.print(f"  E[R₂] = [cyan]{refs.expected_remainder:.6g}[/cyan]")
    console.print(f"\n  🎉 Wrote [bold green]{out}[/bold green] (mle.csv, mle.bin, lhat.txt)")
