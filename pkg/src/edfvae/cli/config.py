"""
Experiment configuration: a YAML file per experiment, CLI overrides, and the
run lock written next to the outputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import typer
import yaml

from edfvae import __version__
from edfvae.core.edf import EdfFamily, parse_family_kind
from edfvae.data import Dataset, get_loader
from edfvae.errors import ConfigError
from edfvae.nn.init import LOGVAR_WEIGHTS, TRUNK_INITS
from edfvae.nn.model import Architecture

from .main import app, console, exit_on_error

logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "EDFVAE_OUTPUT_ROOT"
LOCK_FILE = "run.lock.json"
INITS = ("bench", "mle_b")


@dataclass
class ExperimentConfig:
    dataset: str = "synthetic://?n=10000&d=200"
    family: str = "bernoulli"
    architecture: str = "canonical"
    kappa: int = 2
    beta: float = 1.0
    betas: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    data_seed: int = 0
    batch: int = 100
    total_batches: int = 25_000
    lr: float = 1e-4
    eval_every: int = 500
    init: str = "mle_b"
    hidden_scale: float = 1.0
    output_dir: str = "runs/default"
    gaussian_phi: str | float = "mle"
    rho: float = 1.0
    trials_n: int = 1
    eval_mc_samples: int = 16
    trunk_init: str = "identity"
    logvar_weights: str = "zero"
    test_fraction: float = 0.33
    max_rows: int | None = None
    plot: bool = False
    has_header: bool = False
    allow_raw: bool = False
    test_path: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        parse_family_kind(self.family)
        if self.architecture not in {a.value for a in Architecture}:
            raise ConfigError(f"Unknown architecture '{self.architecture}'. Valid: deep, canonical")
        if self.init not in INITS:
            raise ConfigError(f"Unknown init '{self.init}'. Valid: {', '.join(INITS)}")
        if self.trunk_init not in TRUNK_INITS:
            raise ConfigError(f"Unknown trunk_init '{self.trunk_init}'. Valid: {', '.join(TRUNK_INITS)}")
        if self.logvar_weights not in LOGVAR_WEIGHTS:
            raise ConfigError(f"Unknown logvar_weights '{self.logvar_weights}'. Valid: {', '.join(LOGVAR_WEIGHTS)}")
        if self.kappa < 1:
            raise ConfigError(f"kappa must be >= 1, got {self.kappa}")
        if not (math.isfinite(self.beta) and self.beta >= 0) or any(b < 0 for b in self.betas):
            raise ConfigError("beta values must be nonnegative")
        if not self.seeds:
            raise ConfigError("seeds must list at least one seed")
        if self.batch < 1 or self.total_batches < 0 or self.eval_every < 1 or self.eval_mc_samples < 1:
            raise ConfigError("batch, eval_every and eval_mc_samples must be >= 1; total_batches >= 0")
        if not self.lr >= 0:
            raise ConfigError(f"lr must be nonnegative, got {self.lr}")
        if self.gaussian_phi != "mle":
            try:
                phi = float(self.gaussian_phi)
            except (TypeError, ValueError):
                msg = f"gaussian_phi must be 'mle' or a positive number, got {self.gaussian_phi!r}"
                raise ConfigError(msg) from None
            if not phi > 0:
                raise ConfigError(f"gaussian_phi must be positive, got {phi}")
            self.gaussian_phi = phi

    # ── serialization ──

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path: str | Path) -> ExperimentConfig:
        if not os.path.isfile(path):
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping of config keys")
        return cls.from_dict(data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_yaml())

    def with_overrides(self, **overrides) -> ExperimentConfig:
        """Copy with every non-None override applied (CLI flags win over the file)."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **updates)

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical YAML form."""
        return hashlib.sha256(self.to_yaml().encode("utf-8")).hexdigest()

    # ── derived objects ──

    @property
    def estimate_dispersion(self) -> bool:
        return self.gaussian_phi == "mle"

    def observation_family(self) -> EdfFamily:
        phi = 1.0 if self.estimate_dispersion else float(self.gaussian_phi)
        return EdfFamily.from_name(
            self.family, trials_n=self.trials_n, dispersion_phi=phi, canonical_scale_rho=self.rho
        )

    def resolved_output_dir(self) -> Path:
        out = Path(os.path.expanduser(self.output_dir))
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not out.is_absolute():
            out = Path(os.path.expanduser(root)) / out
        return out

    def load_dataset(self) -> Dataset:
        loader = get_loader(
            self.dataset,
            seed=self.data_seed,
            test_fraction=self.test_fraction,
            max_rows=self.max_rows,
            has_header=self.has_header,
            allow_raw=self.allow_raw,
            test_path=self.test_path,
        )
        loader.validate()
        return loader.load()


def parse_list(text: str | None, cast=float) -> list | None:
    """``"1,2,5"`` → ``[1.0, 2.0, 5.0]``; None passes through."""
    if text is None:
        return None
    try:
        return [cast(item.strip()) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"Cannot parse list '{text}': {e}") from e


def resolve_config(config_path: str | None, **overrides) -> ExperimentConfig:
    base = ExperimentConfig.from_yaml(config_path) if config_path else ExperimentConfig()
    return base.with_overrides(**overrides)


def write_lock(cfg: ExperimentConfig, output_dir: Path, command: str, extra: dict | None = None) -> Path:
    """Write ``run.lock.json`` with the config fingerprint for change detection."""
    lock = {
        "command": command,
        "config_hash": cfg.config_hash,
        "dataset": cfg.dataset,
        "edfvae_version": __version__,
        "seeds": cfg.seeds,
    }
    lock.update(extra or {})
    path = output_dir / LOCK_FILE
    with open(path, "w", encoding="utf-8") as f:
        json.dump(lock, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_lock(output_dir: Path) -> dict | None:
    path = output_dir / LOCK_FILE
    if not path.exists():
        return None
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (json.JSONDecodeError, OSError):
        return None


def prepare_output(cfg: ExperimentConfig, command: str) -> Path:
    """Create the output directory and note when its previous run used another config."""
    out = cfg.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    old = read_lock(out)
    if old and old.get("config_hash") != cfg.config_hash:
        console.print(f"  ⚠️  [yellow]Config changed since the last run in {out}; outputs are replaced.[/yellow]")
    cfg.save(out / "experiment.yaml")
    return out


@app.command("new-config")
def new_config(
    path: str = typer.Argument("experiment.yaml", help="Where to write the config file."),
    force: bool = typer.Option(False, "--force", help="Overwrite an existing file."),
):
    """Write a config file with every default spelled out.

    Examples:
        edfvae new-config
        edfvae new-config runs/mnist.yaml --force
    """
    with exit_on_error():
        if os.path.exists(path) and not force:
            raise ConfigError(f"{path} already exists (use --force to overwrite)")
        ExperimentConfig().save(path)
    console.print(f"  🎉 Created: [bold green]{path}[/bold green]")
