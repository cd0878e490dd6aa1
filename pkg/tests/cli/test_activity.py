import csv

from typer.testing import CliRunner

from edfvae.cli import app
from edfvae.cli.activity import DISTANCE_HEADER, HISTOGRAM_HEADER

runner = CliRunner()


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestActivityCommand:
    def test_beta_sweep(self, small_config, output_root):
        result = runner.invoke(app, ["activity", "-c", small_config, "--betas", "1,50", "--seeds", "0,1", "--plot"])
        assert result.exit_code == 0, result.output
        out = output_root / "run"

        distance = _rows(out / "distance.csv")
        assert tuple(distance[0]) == DISTANCE_HEADER
        assert [r[0] for r in distance[1:]] == ["1.0", "50.0"]
        for row in distance[1:]:
            assert 0.0 <= float(row[1]) <= 1.0
            assert row[3] == "2"

        histograms = _rows(out / "histograms.csv")
        assert tuple(histograms[0]) == HISTOGRAM_HEADER
        analytical = [r for r in histograms[1:] if r[1] == ""]
        assert {r[4] for r in analytical} == {"analytical"}
        assert len(analytical) == 2 * 10
        assert sum(int(r[3]) for r in analytical if r[0] == "1.0") == 2

        for beta in ("1", "50"):
            for seed in (0, 1):
                per_run = _rows(out / f"activity_beta{beta}_seed{seed}.csv")
                assert per_run[0] == ["dim", "value", "source"]
                assert {r[2] for r in per_run[1:]} == {"analytical", "empirical"}
            assert (out / f"histogram_beta{beta}.svg").exists()

    def test_falls_back_to_single_beta(self, small_config, output_root):
        result = runner.invoke(app, ["activity", "-c", small_config, "--batches", "0"])
        assert result.exit_code == 0, result.output
        distance = _rows(output_root / "run" / "distance.csv")
        assert len(distance) == 2
        assert distance[1][2] == "0.0"

    def test_untrained_mle_b_matches_prediction(self, small_config, output_root):
        result = runner.invoke(app, ["activity", "-c", small_config, "--batches", "0", "--betas", "0.5,2"])
        assert result.exit_code == 0, result.output
        distance = _rows(output_root / "run" / "distance.csv")
        assert [float(r[1]) for r in distance[1:]] == [0.0, 0.0]

    def test_bad_betas(self, small_config):
        result = runner.invoke(app, ["activity", "-c", small_config, "--betas", "1,-2"])
        assert result.exit_code == 2

    def test_beta_zero_predicts_every_unit_active(self, small_config, output_root):
        args = ["activity", "-c", small_config, "--betas", "0,1", "--batches", "0", "--seeds", "0,1"]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        assert "He init" in " ".join(result.output.split())
        out = output_root / "run"

        distance = {r[0]: r for r in _rows(out / "distance.csv")[1:]}
        assert set(distance) == {"0.0", "1.0"}
        assert distance["0.0"][4] == "2"
        assert distance["0.0"][3] == "2"

        analytical = [r for r in _rows(out / "histograms.csv")[1:] if r[0] == "0.0" and r[1] == ""]
        assert [(r[2], r[3]) for r in analytical if r[3] != "0"] == [("[0.9,inf)", "2")]
        assert (out / "activity_beta0_seed1.csv").exists()
