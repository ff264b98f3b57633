"""Tests for the CLI module."""

import csv
import json

import pytest
from typer.testing import CliRunner

from wavelocate import __version__
from wavelocate.cli import app

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(arg) for arg in args])


@pytest.fixture
def dataset_dir(temp_dir, toy_config):
    """Toy dataset written by `simulate`."""
    out = temp_dir / "data"
    result = invoke("simulate", "-c", toy_config, "-o", out)
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture
def model_dir(temp_dir, toy_config, dataset_dir):
    """Toy model written by `train`."""
    out = temp_dir / "model"
    result = invoke("train", dataset_dir, "-c", toy_config, "-o", out)
    assert result.exit_code == 0, result.output
    return out


class TestVersion:
    """Tests for the global options."""

    def test_version(self):
        """Test --version output."""
        result = invoke("--version")
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_unknown_log_level(self, monkeypatch, temp_dir):
        """Test an invalid WAVELOCATE_LOG value."""
        monkeypatch.setenv("WAVELOCATE_LOG", "loud")
        result = invoke("dispersion", "-o", temp_dir / "d.csv")
        assert result.exit_code == 2
        assert "WAVELOCATE_LOG" in result.output


class TestDispersionCommand:
    """Tests for `wavelocate dispersion`."""

    def test_default_plate(self, temp_dir):
        """Test one row per bin with omega, S0 and A0 columns."""
        out = temp_dir / "dispersion.csv"
        result = invoke("dispersion", "-o", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "omega_rad_s,kappa_S0,kappa_A0"
        assert len(lines) == 1 + 256
        assert all(len(line.split(",")) == 3 for line in lines)
        assert (temp_dir / "resolved.json").exists()

    def test_rerun_is_byte_identical(self, temp_dir, toy_config):
        """Test deterministic output."""
        for name in ("a.csv", "b.csv"):
            assert invoke("dispersion", "-c", toy_config, "-o", temp_dir / name).exit_code == 0
        assert (temp_dir / "a.csv").read_bytes() == (temp_dir / "b.csv").read_bytes()

    def test_invalid_poisson_ratio(self, temp_dir):
        """Test exit code 2 and the offending key in the message."""
        config = temp_dir / "bad.toml"
        config.write_text("[plate]\npoisson_ratio = 0.7\n", encoding="utf-8")
        result = invoke("dispersion", "-c", config, "-o", temp_dir / "d.csv")
        assert result.exit_code == 2
        assert "plate.poisson_ratio" in result.output
        assert not (temp_dir / "d.csv").exists()

    def test_unknown_key(self, temp_dir):
        """Test that typos are configuration errors."""
        config = temp_dir / "typo.toml"
        config.write_text("[plate]\nthicknes = 0.002\n", encoding="utf-8")
        result = invoke("dispersion", "-c", config, "-o", temp_dir / "d.csv")
        assert result.exit_code == 2
        assert "plate.thicknes" in result.output

    def test_section_name_is_printed_verbatim(self, temp_dir):
        """Test that bracketed section names survive console markup."""
        config = temp_dir / "flat.toml"
        config.write_text("plate = 3\n", encoding="utf-8")
        result = invoke("dispersion", "-c", config, "-o", temp_dir / "d.csv")
        assert result.exit_code == 2
        assert "[plate] must be a table" in result.output

    def test_missing_config_file(self, temp_dir):
        """Test a configuration path that does not exist."""
        result = invoke("dispersion", "-c", temp_dir / "absent.toml")
        assert result.exit_code == 2


class TestSimulateCommand:
    """Tests for `wavelocate simulate`."""

    def test_manifest_counts(self, dataset_dir):
        """Test the configured split sizes and the resolved echo."""
        manifest = json.loads((dataset_dir / "manifest.json").read_text())
        assert {split: info["count"] for split, info in manifest["splits"].items()} == {
            "train": 10,
            "val": 2,
            "test": 2,
        }
        assert manifest["master_seed"] == 11
        resolved = json.loads((dataset_dir / "resolved.json").read_text())
        assert resolved["seed"] == 11

    def test_identical_reruns(self, temp_dir, toy_config):
        """Test byte-identical datasets from one seed and different thread counts."""
        for name, threads in (("a", 1), ("b", 3)):
            result = invoke("simulate", "-c", toy_config, "-o", temp_dir / name, "-t", threads)
            assert result.exit_code == 0, result.output
        for blob in ("manifest.json", "train.f64", "val.f64", "test.f64"):
            assert (temp_dir / "a" / blob).read_bytes() == (temp_dir / "b" / blob).read_bytes()

    def test_seed_option_overrides_config(self, temp_dir, toy_config):
        """Test --seed."""
        result = invoke("simulate", "-c", toy_config, "-s", 5, "-o", temp_dir / "d")
        assert result.exit_code == 0, result.output
        manifest = json.loads((temp_dir / "d" / "manifest.json").read_text())
        assert manifest["master_seed"] == 5

    def test_alpha_bounds(self, temp_dir, toy_config_text):
        """Test the recorded distortion range and the sampled factors."""
        config = temp_dir / "distorted.toml"
        config.write_text(toy_config_text + "\n[uncertainty]\nw_distort = 0.15\n")
        result = invoke("simulate", "-c", config, "-o", temp_dir / "d")
        assert result.exit_code == 0, result.output
        manifest = json.loads((temp_dir / "d" / "manifest.json").read_text())
        assert manifest["scenario"]["uncertainty"]["alpha_bounds"] == [0.85, 1.15]
        alphas = [a for info in manifest["splits"].values() for a in info["alpha"]]
        assert all(0.85 <= a <= 1.15 for a in alphas)

    def test_missing_seed(self, temp_dir):
        """Test exit code 2 without any master seed."""
        result = invoke("simulate", "-o", temp_dir / "d")
        assert result.exit_code == 2
        assert "seed" in result.output
        assert not (temp_dir / "d").exists()


class TestTrainCommand:
    """Tests for `wavelocate train`."""

    def test_model_files(self, model_dir):
        """Test the model document, parameters and history."""
        document = json.loads((model_dir / "model.json").read_text())
        assert document["spec"]["hidden"] == [16, 8]
        assert len(document["history"]) == 3
        assert document["cv"] == []
        assert (model_dir / "params.f64").stat().st_size > 0
        assert (model_dir / "resolved.json").exists()

    def test_cross_validation(self, temp_dir, toy_config, dataset_dir):
        """Test one log entry per fold."""
        out = temp_dir / "cv_model"
        result = invoke("train", dataset_dir, "-c", toy_config, "-o", out, "--cv3")
        assert result.exit_code == 0, result.output
        document = json.loads((out / "model.json").read_text())
        assert len(document["cv"]) == 3
        assert document["spec"]["dropout"] in (0.15, 0.2, 0.25)

    def test_input_dim_mismatch(self, temp_dir, toy_config_text, dataset_dir):
        """Test a network built for another feature count."""
        config = temp_dir / "wide.toml"
        config.write_text(toy_config_text.replace("components = 2", "components = 2\ninput_dim = 5"))
        result = invoke("train", dataset_dir, "-c", config, "-o", temp_dir / "m")
        assert result.exit_code == 2
        assert "dataset provides" in result.output

    def test_missing_dataset(self, temp_dir, toy_config):
        """Test exit code 4 for an unreadable dataset."""
        result = invoke("train", temp_dir / "nowhere", "-c", toy_config)
        assert result.exit_code == 4

    def test_manifest_without_val_split(self, temp_dir, toy_config, dataset_dir):
        """Test exit code 4 for a manifest missing a split entry."""
        manifest_path = dataset_dir / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        del manifest["splits"]["val"]
        manifest_path.write_text(json.dumps(manifest))
        result = invoke("train", dataset_dir, "-c", toy_config, "-o", temp_dir / "m")
        assert result.exit_code == 4
        assert "malformed manifest" in result.output

    def test_diverging_learning_rate(self, temp_dir, toy_config_text, dataset_dir):
        """Test exit code 5 when the optimizer blows up."""
        config = temp_dir / "hot.toml"
        config.write_text(toy_config_text.replace("epochs = 3", "epochs = 3\nlearning_rate = 1e300"))
        result = invoke("train", dataset_dir, "-c", config, "-o", temp_dir / "m")
        assert result.exit_code == 5
        assert "epoch" in result.output
        assert not (temp_dir / "m" / "model.json").exists()


class TestEvalCommand:
    """Tests for `wavelocate eval`."""

    def test_mfp_only(self, temp_dir, toy_config, dataset_dir):
        """Test empty uncertainty cells for the point estimator."""
        out = temp_dir / "report"
        result = invoke("eval", "-c", toy_config, "-d", dataset_dir, "--methods", "mfp", "-o", out)
        assert result.exit_code == 0, result.output
        with open(out / "report.csv", newline="", encoding="utf-8") as handle:
            [row] = list(csv.DictReader(handle))
        assert row["method"] == "mfp"
        assert float(row["ale"]) >= 0
        assert row["ci95"] == row["max_var"] == row["mean_loglik"] == ""
        assert (out / "report.json").exists()
        assert (out / "resolved.json").exists()

    def test_both_methods_and_surfaces(self, temp_dir, toy_config, dataset_dir, model_dir):
        """Test rows for MDN and MFP plus exported rasters."""
        out = temp_dir / "report"
        result = invoke(
            "eval",
            "-c",
            toy_config,
            "-d",
            dataset_dir,
            "-m",
            model_dir,
            "-o",
            out,
            "--export-surfaces",
            2,
        )
        assert result.exit_code == 0, result.output
        with open(out / "report.csv", newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [row["method"] for row in rows] == ["mdn", "mfp"]
        assert 0 <= float(rows[0]["ci95"]) <= 1

        surfaces = out / "surfaces"
        names = sorted(path.name for path in surfaces.iterdir())
        assert names == [
            "mdn_0000.csv",
            "mdn_0000.pgm",
            "mdn_0001.csv",
            "mdn_0001.pgm",
            "mfp_0000.csv",
            "mfp_0000.pgm",
            "mfp_0001.csv",
            "mfp_0001.pgm",
        ]
        assert (surfaces / "mfp_0000.pgm").read_bytes().startswith(b"P5\n11 9\n65535\n")
        assert len((surfaces / "mdn_0001.csv").read_text().splitlines()) == 1 + 11 * 9

    def test_mdn_needs_a_model(self, temp_dir, toy_config, dataset_dir):
        """Test the default method list without --model."""
        result = invoke("eval", "-c", toy_config, "-d", dataset_dir, "-o", temp_dir / "r")
        assert result.exit_code == 2
        assert "--model" in result.output

    def test_needs_a_dataset(self, temp_dir, toy_config):
        """Test eval without --dataset or --sweep."""
        result = invoke("eval", "-c", toy_config, "-o", temp_dir / "r")
        assert result.exit_code == 2

    def test_unknown_method(self, temp_dir, toy_config, dataset_dir):
        """Test --methods validation."""
        result = invoke("eval", "-c", toy_config, "-d", dataset_dir, "--methods", "music")
        assert result.exit_code == 2

    def test_sweep(self, temp_dir, toy_config_text):
        """Test a two-cell sweep with both methods."""
        config = temp_dir / "sweep.toml"
        config.write_text(toy_config_text + "\n[sweep]\nw_distort = [0.0, 0.2]\n")
        out = temp_dir / "sweep"
        result = invoke("eval", "-c", config, "--sweep", "-o", out)
        assert result.exit_code == 0, result.output
        report = json.loads((out / "report.json").read_text())
        keys = sorted((row["w_distort"], row["method"]) for row in report["rows"])
        assert keys == [(0.0, "mdn"), (0.0, "mfp"), (0.2, "mdn"), (0.2, "mfp")]
