"""
Tests for experiment configuration — cli/config.py

Covers:
- YAML round trip and unknown keys
- Validation of family, architecture, init and gaussian_phi
- CLI overrides and the output root
- new-config and --version
"""

import json

import pytest
from typer.testing import CliRunner

from edfvae import __version__
from edfvae.cli import app
from edfvae.cli.config import ExperimentConfig, parse_list, prepare_output, read_lock, resolve_config, write_lock
from edfvae.errors import ConfigError

runner = CliRunner()


class TestExperimentConfig:
    def test_yaml_round_trip(self, tmp_path):
        cfg = ExperimentConfig(family="poisson", kappa=5, betas=[1.0, 20.0], seeds=[0, 1, 2], gaussian_phi=0.5)
        path = tmp_path / "c.yaml"
        cfg.save(path)
        assert ExperimentConfig.from_yaml(path) == cfg

    def test_hash_tracks_content(self):
        assert ExperimentConfig().config_hash == ExperimentConfig().config_hash
        assert ExperimentConfig(beta=2.0).config_hash != ExperimentConfig().config_hash

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("kappa: 2\nlatent_size: 3\n")
        with pytest.raises(ConfigError, match="latent_size"):
            ExperimentConfig.from_yaml(path)

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            ExperimentConfig.from_yaml(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            ExperimentConfig.from_yaml(tmp_path / "nope.yaml")

    @pytest.mark.parametrize(
        "overrides",
        [
            {"family": "gamma"},
            {"architecture": "wide"},
            {"init": "xavier"},
            {"kappa": 0},
            {"beta": -1.0},
            {"seeds": []},
            {"gaussian_phi": "auto"},
            {"gaussian_phi": -2.0},
            {"trunk_init": "zeros"},
        ],
    )
    def test_invalid(self, overrides):
        with pytest.raises(ConfigError):
            ExperimentConfig(**overrides)

    def test_fixed_gaussian_phi(self):
        cfg = ExperimentConfig(family="gaussian", gaussian_phi="0.25")
        assert not cfg.estimate_dispersion
        assert cfg.observation_family().dispersion_phi == 0.25

    def test_overrides_skip_none(self):
        cfg = resolve_config(None, kappa=7, beta=None)
        assert cfg.kappa == 7 and cfg.beta == 1.0

    def test_output_root(self, output_root):
        assert ExperimentConfig(output_dir="runs/a").resolved_output_dir() == output_root / "runs" / "a"

    def test_parse_list(self):
        assert parse_list("1, 2,5") == [1.0, 2.0, 5.0]
        assert parse_list(None) is None
        with pytest.raises(ConfigError):
            parse_list("1,x", int)


class TestLock:
    def test_write_and_read(self, output_root):
        cfg = ExperimentConfig(output_dir="run")
        out = prepare_output(cfg, "mle")
        write_lock(cfg, out, "mle", {"active_count": 2})
        lock = read_lock(out)
        assert lock["config_hash"] == cfg.config_hash
        assert lock["active_count"] == 2
        assert (out / "experiment.yaml").exists()

    def test_corrupt_lock_ignored(self, tmp_path):
        (tmp_path / "run.lock.json").write_text("{not json")
        assert read_lock(tmp_path) is None

    def test_changed_config_noted(self, output_root, capsys):
        out = prepare_output(ExperimentConfig(output_dir="run"), "mle")
        write_lock(ExperimentConfig(output_dir="run"), out, "mle")
        prepare_output(ExperimentConfig(output_dir="run", beta=3.0), "mle")
        assert "Config changed" in " ".join(capsys.readouterr().out.split())
        assert json.loads((out / "run.lock.json").read_text())["command"] == "mle"


class TestCommands:
    def test_version(self):
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_new_config(self, tmp_path):
        path = tmp_path / "experiment.yaml"
        result = runner.invoke(app, ["new-config", str(path)])
        assert result.exit_code == 0
        assert ExperimentConfig.from_yaml(path) == ExperimentConfig()

    def test_new_config_refuses_overwrite(self, tmp_path):
        path = tmp_path / "experiment.yaml"
        path.write_text("kappa: 3\n")
        result = runner.invoke(app, ["new-config", str(path)])
        assert result.exit_code == 2
        assert "already exists" in " ".join(result.output.split())
        assert runner.invoke(app, ["new-config", str(path), "--force"]).exit_code == 0
