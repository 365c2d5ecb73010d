import csv

import numpy as np
import pytest

from degauss.cli import EXIT_CONFIG, EXIT_INCONSISTENT, EXIT_NUMERICAL, EXIT_OK, load_config, main
from degauss.errors import InvalidInputError
from degauss.experiments import BELIEF_HEADER, ExperimentConfig, compare_models, run_estimation, sweep_ridge
from degauss.robotsim import WorldConfig

SMALL = {"steps": 12, "window": [5, 10]}


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text("world:\n  steps: 12\n  window: [5, 10]\n")
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_config_mapping_forms():
    nested = ExperimentConfig.from_mapping({"world": SMALL, "method": "ridge"})
    flat = ExperimentConfig.from_mapping({**SMALL, "method": "ridge"})
    assert nested == flat
    assert nested.world.window == (5, 10)
    with pytest.raises(InvalidInputError):
        ExperimentConfig.from_mapping({"bogus": 1})
    with pytest.raises(InvalidInputError):
        ExperimentConfig.from_mapping({"world": {"bogus": 1}})
    with pytest.raises(InvalidInputError):
        ExperimentConfig(method="nope")
    with pytest.raises(InvalidInputError):
        ExperimentConfig(ridge_grid=(1e-3, 0.0))


def test_load_config(tmp_path):
    assert load_config(None) == {}
    path = tmp_path / "c.json"
    path.write_text('{"method": "ridge", "world": {"seed": 4}}')
    assert load_config(str(path)) == {"method": "ridge", "world": {"seed": 4}}
    path.write_text("[1, 2]")
    with pytest.raises(InvalidInputError):
        load_config(str(path))


def test_run_estimation_writes_beliefs(tmp_path):
    config = ExperimentConfig(world=WorldConfig(**{**SMALL, "window": (5, 10)}), out_dir=str(tmp_path))
    report = run_estimation(config)
    assert report.ok and report.sweeps == 2
    rows = read_rows(tmp_path / "beliefs.csv")
    assert rows[0] == BELIEF_HEADER
    assert len(rows) == 1 + 12 * 3
    assert (tmp_path / "beliefs.svg").read_text().startswith("<svg")
    assert np.isfinite(report.log_evidence)
    assert set(report.ranks.ravel()) == {3}


def test_sweeps_return_tables(tmp_path):
    world = WorldConfig(steps=12, window=(5, 10))
    config = ExperimentConfig(world=world, seeds=(0, 1), ridge_grid=(1e-6, 1e-2, 1.0), out_dir=str(tmp_path))
    result = sweep_ridge(config)
    kappas = [r["kappa"] for r in result["rows"]]
    assert kappas == sorted(kappas, reverse=True)
    assert all(r["failures"] == 0 for r in result["rows"])
    assert len(read_rows(tmp_path / "sweep_ridge.csv")) == 1 + 3 + 1
    config = config.replace(pickup_grid=(3, 4, 5), size_grid=(0.8, 1.0, 1.2))
    models = compare_models(config)
    for name in ("pickup", "size"):
        rows = models[name]["rows"]
        assert sum(r["argmax"] for r in rows) == 1
        assert sum(r["wins"] for r in rows) == 2
        assert models[name]["logz"].shape == (3, 2)


def test_cli_simulate_and_estimate(tmp_path, small_config, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--config", small_config, "--out-dir", str(out)]) == EXIT_OK
    assert len(read_rows(out / "trajectory.csv")) == 1 + 13 * 3
    assert len(read_rows(out / "auxiliary.csv")) == 1 + 6 * 2
    assert main(["estimate", "--config", small_config, "--out-dir", str(out), "--no-plots"]) == EXIT_OK
    assert "log evidence" in capsys.readouterr().out
    assert not (out / "beliefs.svg").exists()
    assert main(["estimate", "--config", small_config, "--out-dir", str(out), "--moments-only", "--no-plots"]) == EXIT_OK
    assert "log evidence" not in capsys.readouterr().out


def test_cli_configuration_errors(tmp_path, small_config):
    assert main(["estimate", "--config", str(tmp_path / "missing.yaml")]) == EXIT_CONFIG
    bad = tmp_path / "bad.yaml"
    bad.write_text("world:\n  window: [30, 11]\n")
    assert main(["estimate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["sweep-ridge", "--config", small_config, "--moments-only"]) == EXIT_CONFIG
    with pytest.raises(SystemExit):
        main(["estimate", "--method", "nope"])


def test_cli_inconsistent_evidence(tmp_path):
    # Noise-free fixes of the true formation contradict the rescaled geometry.
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "world:\n  steps: 12\n  window: [5, 10]\n  size: 1.3\n"
        "  motion_noise: [[0, 0, 0], [0, 0, 0], [0, 0, 0]]\n"
        "  measurement_noise: [[0, 0], [0, 0]]\n"
    )
    code = main(["estimate", "--config", str(cfg), "--out-dir", str(tmp_path), "--no-plots"])
    assert code == EXIT_INCONSISTENT


def test_cli_selftest(capsys):
    assert main(["selftest", "--cases", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
    assert main(["selftest", "--cases", "3", "--mutate"]) == EXIT_NUMERICAL
    assert "FAIL closure" in capsys.readouterr().out
