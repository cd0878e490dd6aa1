import typer

from edfvae.errors import ConfigError
from edfvae.nn import save_checkpoint

from .config import prepare_output, resolve_config, write_lock
from .experiment import build_model, fit_mle, model_family
from .main import app, console, exit_on_error


@app.command("init-export")
def init_export(
    config: str = typer.Option(None, "--config", "-c", help="Experiment YAML file."),
    dataset: str = typer.Option(None, "--dataset", "-d", help="Dataset URI."),
    family: str = typer.Option(None, "--family", "-f", help="gaussian | bernoulli | binomial | poisson."),
    architecture: str = typer.Option(None, "--architecture", "-a", help="deep | canonical."),
    kappa: int = typer.Option(None, "--kappa", "-k", help="Latent dimension."),
    beta: float = typer.Option(None, "--beta", "-b", help="KL weight."),
    seed: int = typer.Option(None, "--seed", help="Seed for the He-initialized remainder of the network."),
    output_dir: str = typer.Option(None, "--output", "-o", help="Output directory."),
):
    """📦 Write the MLE-B initialized network and its closed-form solution.

    init_mle_b.bin is a regular checkpoint; ``train`` with ``--init mle_b``
    and the same seed starts from identical parameters.

    Examples:
        edfvae init-export --architecture canonical --kappa 2
        edfvae init-export -c mnist.yaml --seed 3
    """
    with exit_on_error():
        cfg = resolve_config(
            config,
            dataset=dataset,
            family=family,
            architecture=architecture,
            kappa=kappa,
            beta=beta,
            seeds=None if seed is None else [seed],
            output_dir=output_dir,
            init="mle_b",
        )
        if cfg.beta <= 0:
            raise ConfigError("init-export needs beta > 0: the MLE-B posterior variance is zero at beta=0")
        with console.status(f"[bold green]Loading {cfg.dataset}..."):
            data = cfg.load_dataset()
        with console.status("[bold green]Solving the closed-form MLE..."):
            sol = fit_mle(cfg, data, cfg.beta)
        model = build_model(cfg, data.d, model_family(cfg, sol), cfg.beta, cfg.seeds[0], sol)
        out = prepare_output(cfg, "init-export")
        save_checkpoint(model, out / "init_mle_b.bin")
        sol.save(out / "mle.bin")
        write_lock(cfg, out, "init-export", {"layer_dims": model.layer_dims()})

    active = f"{sol.active_count}/{sol.kappa} active"
    console.print(f"  ✅ {cfg.architecture} network, layers {model.layer_dims()}, {active}")
    console.print(f"  🎉 Wrote [bold green]{out}[/bold green] (init_mle_b.bin, mle.bin)")
