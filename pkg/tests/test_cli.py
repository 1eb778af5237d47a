import json

import numpy as np
import pandas as pd
import pytest

from simulation import DATASET_COLUMNS
from surrogate import PARAM_NAMES, TARGET_NAMES, SurrogatePredictor, init_params, load_checkpoint
from tabular import read_csv, write_csv
from thermoflux import EXIT_CONVERGENCE, EXIT_DIVERGED, EXIT_INPUT, EXIT_OK, main

FAST_CONFIG = {
    "grid": {"length_m": 0.01, "n_nodes": 11},
    "time": {"dt_s": 0.25, "t_end_s": 2.0},
    "radiation": {"n_ordinates": 2},
    "output": {"snapshot_times_s": [1.0, 2.0]},
}


def write_json(path, document):
    path.write_text(json.dumps(document))
    return str(path)


@pytest.fixture
def config_path(tmp_path):
    return write_json(tmp_path / "run.json", FAST_CONFIG)


@pytest.fixture
def dataset_path(tmp_path):
    rows = []
    for x in (0.0, 0.005, 0.01):
        for t in np.arange(30, dtype=float):
            rows.append((
                0, t, x,
                300.0 + 10.0 * np.exp(-200.0 * x) * np.sin(0.2 * t),
                50.0 * np.cos(0.15 * t) + 1e4 * x,
                100.0 - 100.0 * t * x + 3.0 * np.sin(0.5 * t),
            ))
    frame = pd.DataFrame(rows, columns=["run_id", "time_s", "x_m", "temperature_K", "q_rad_W_m2", "q_cond_W_m2"])
    return str(write_csv(frame, tmp_path / "dataset.csv"))


class PerfectPredictor:
    """Returns the truth columns of whatever table it is given."""

    train_fraction = 0.8

    def predict(self, frame):
        return frame[list(TARGET_NAMES)].copy()


@pytest.fixture
def perfect_model(monkeypatch):
    monkeypatch.setattr(SurrogatePredictor, "from_path", staticmethod(lambda path: PerfectPredictor()))
    return "perfect.json"


class TestSimulate:
    def test_profile_rows(self, tmp_path, config_path):
        assert main(["simulate", "--config", config_path, "--out", str(tmp_path / "out")]) == EXIT_OK
        profile = read_csv(tmp_path / "out" / "profile.csv")
        assert len(profile) == 2 * 11
        assert list(profile.columns) == [
            "time_s", "x_m", "temperature_K", "q_cond_W_m2", "q_rad_W_m2", "q_total_W_m2",
        ]
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["status"] == "success"
        assert all((tmp_path / "out" / "profile.csv").samefile(p) for p in manifest["outputs"])

    def test_radiation_off(self, tmp_path, config_path):
        out = tmp_path / "out"
        assert main(["simulate", "--config", config_path, "--out", str(out), "--radiation", "off"]) == EXIT_OK
        assert np.all(read_csv(out / "profile.csv")["q_rad_W_m2"] == 0.0)

    def test_repeat_runs_are_identical(self, tmp_path, config_path):
        main(["simulate", "--config", config_path, "--out", str(tmp_path / "a")])
        main(["simulate", "--config", config_path, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "profile.csv").read_bytes() == (tmp_path / "b" / "profile.csv").read_bytes()

    def test_csv_format(self, tmp_path, config_path):
        main(["simulate", "--config", config_path, "--out", str(tmp_path)])
        raw = (tmp_path / "profile.csv").read_bytes()
        assert b"\r" not in raw
        assert raw.startswith(b"time_s,x_m,temperature_K,")

    def test_missing_config(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == EXIT_INPUT

    def test_unknown_key_is_named(self, tmp_path, capsys):
        path = write_json(tmp_path / "bad.json", {"grid": {"n_nodez": 11}})
        assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == EXIT_INPUT
        assert "grid.n_nodez" in capsys.readouterr().err

    def test_picard_failure(self, tmp_path):
        document = {**FAST_CONFIG, "material": {"preset": "pmma-default"}, "coupling": {"picard_max": 1}}
        path = write_json(tmp_path / "stiff.json", document)
        assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == EXIT_CONVERGENCE


class TestDataset:
    def test_single_run(self, tmp_path, config_path):
        out = tmp_path / "data.csv"
        assert main(["dataset", "--config", config_path, "--out", str(out)]) == EXIT_OK
        frame = read_csv(out)
        assert list(frame.columns) == ["run_id", "time_s", "x_m", "temperature_K", "q_rad_W_m2", "q_cond_W_m2"]
        assert set(frame["run_id"]) == {0}
        # snapshots every second plus the configured times: 0, 1, 2 s
        assert len(frame) == 3 * 11
        assert (tmp_path / "data_manifest.json").is_file()

    def test_repeated_sweep_values(self, tmp_path, config_path, monkeypatch):
        monkeypatch.setenv("THERMOFLUX_THREADS", "2")
        sweep = write_json(tmp_path / "sweep.json", {"parameter": "bc.ramp_rate", "values": [40.0, 40.0, 40.0]})
        out = tmp_path / "data.csv"
        assert main(["dataset", "--config", config_path, "--sweep", sweep, "--out", str(out)]) == EXIT_OK
        frame = read_csv(out)
        assert sorted(frame["run_id"].unique()) == [0, 1, 2]
        blocks = [block.drop(columns="run_id").reset_index(drop=True) for _, block in frame.groupby("run_id")]
        pd.testing.assert_frame_equal(blocks[0], blocks[1])
        pd.testing.assert_frame_equal(blocks[0], blocks[2])

    def test_sweep_order_follows_values(self, tmp_path, config_path):
        sweep = write_json(tmp_path / "sweep.json", {"runs": [{"bc.ramp_rate": 20.0}, {"bc.ramp_rate": 60.0}]})
        out = tmp_path / "data.csv"
        assert main(["dataset", "--config", config_path, "--sweep", sweep, "--out", str(out)]) == EXIT_OK
        frame = read_csv(out)
        peak = frame[(frame["x_m"] == 0.0) & (frame["time_s"] == 1.0)].set_index("run_id")["temperature_K"]
        assert peak[0] == pytest.approx(320.0) and peak[1] == pytest.approx(360.0)

    def test_bad_sweep_point_writes_nothing(self, tmp_path, config_path):
        sweep = write_json(tmp_path / "sweep.json", {"runs": [{}, {"grid.n_nodes": 2}]})
        out = tmp_path / "data.csv"
        assert main(["dataset", "--config", config_path, "--sweep", sweep, "--out", str(out)]) == EXIT_INPUT
        assert not out.exists()


TRAIN_FLAGS = ["--window", "4", "--hidden", "4", "--batch-size", "8"]

# 21 snapshots of an 11 node slab with the front held at 350 K
OVERFIT_CONFIG = {
    "grid": {"length_m": 0.01, "n_nodes": 11},
    "time": {"dt_s": 0.25, "t_end_s": 5.0},
    "bc": {"after_ramp": "hold"},
    "radiation": {"n_ordinates": 2},
    "output": {"snapshot_times_s": [1.0], "snapshot_every_s": 0.25},
}


class TestTrain:
    def test_zero_epochs_keeps_initialization(self, tmp_path, dataset_path):
        out = tmp_path / "model.json"
        assert main(["train", "--dataset", dataset_path, "--out", str(out), "--epochs", "0", *TRAIN_FLAGS]) == EXIT_OK
        checkpoint = load_checkpoint(out)
        expected = init_params(5, 4, 3, seed=42, scale=0.1)
        for name in PARAM_NAMES:
            assert np.array_equal(getattr(checkpoint.params, name), getattr(expected, name))
        curve = read_csv(tmp_path / "model_loss.csv")
        assert list(curve.columns) == ["epoch", "train_mse", "test_mse"]
        assert list(curve["epoch"]) == [0]

    def test_same_seed_same_bytes(self, tmp_path, dataset_path):
        for name in ("a.json", "b.json"):
            args = ["train", "--dataset", dataset_path, "--out", str(tmp_path / name), "--epochs", "3", *TRAIN_FLAGS]
            assert main(args) == EXIT_OK
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert len(read_csv(tmp_path / "a_loss.csv")) == 4

    def test_divergence_exit_code(self, tmp_path, dataset_path):
        args = ["train", "--dataset", dataset_path, "--out", str(tmp_path / "m.json"), "--epochs", "5",
                "--lr", "1e300", *TRAIN_FLAGS]
        with np.errstate(all="ignore"):
            assert main(args) == EXIT_DIVERGED

    def test_learning_rate_sweep(self, tmp_path, dataset_path):
        out = tmp_path / "model.json"
        args = ["train", "--dataset", dataset_path, "--out", str(out), "--epochs", "3",
                "--lr", "0.001", "0.01", "1e300", *TRAIN_FLAGS]
        with np.errstate(all="ignore"):
            assert main(args) == EXIT_OK
        sweep = read_csv(tmp_path / "model_lr.csv")
        assert list(sweep.columns) == ["lr", "final_train_mse", "final_test_mse", "diverged_at_epoch"]
        assert list(sweep["lr"]) == [0.001, 0.01, 1e300]
        assert list(sweep["diverged_at_epoch"][:2]) == [0, 0]
        assert sweep["diverged_at_epoch"].iloc[2] >= 1
        assert np.isnan(sweep["final_test_mse"].iloc[2])
        kept = sweep.loc[sweep["final_test_mse"].idxmin()]
        curve = read_csv(tmp_path / "model_loss.csv")
        assert curve["test_mse"].iloc[-1] == pytest.approx(kept["final_test_mse"], rel=1e-12)

    def test_sweep_where_every_rate_diverges(self, tmp_path, dataset_path):
        args = ["train", "--dataset", dataset_path, "--out", str(tmp_path / "m.json"), "--epochs", "3",
                "--lr", "1e300", "1e301", *TRAIN_FLAGS]
        with np.errstate(all="ignore"):
            assert main(args) == EXIT_DIVERGED
        assert not (tmp_path / "m.json").exists()

    def test_missing_dataset(self, tmp_path):
        assert main(["train", "--dataset", str(tmp_path / "none.csv"), "--out", str(tmp_path / "m.json")]) == EXIT_INPUT


@pytest.fixture
def model_path(tmp_path, dataset_path):
    out = tmp_path / "model.json"
    assert main(["train", "--dataset", dataset_path, "--out", str(out), "--epochs", "2", *TRAIN_FLAGS]) == EXIT_OK
    return str(out)


class TestPredict:
    def test_rows_and_columns(self, tmp_path, model_path, dataset_path):
        out = tmp_path / "pred.csv"
        assert main(["predict", "--model", model_path, "--dataset", dataset_path, "--out", str(out)]) == EXIT_OK
        predicted = read_csv(out)
        assert list(predicted.columns) == ["run_id", "time_s", "x_m", *TARGET_NAMES]
        assert len(predicted) == len(read_csv(dataset_path))

    def test_feature_mismatch(self, tmp_path, model_path, dataset_path):
        stripped = read_csv(dataset_path).drop(columns=["x_m"])
        path = write_csv(stripped, tmp_path / "stripped.csv")
        assert main(["predict", "--model", model_path, "--dataset", str(path), "--out", str(tmp_path / "p.csv")]) == EXIT_INPUT

    def test_bad_checkpoint_version(self, tmp_path, model_path, dataset_path):
        document = json.loads(open(model_path).read())
        document["format_version"] = 99
        path = write_json(tmp_path / "old.json", document)
        assert main(["predict", "--model", path, "--dataset", dataset_path, "--out", str(tmp_path / "p.csv")]) == EXIT_INPUT


class TestEvaluate:
    def test_perfect_predictor(self, tmp_path, dataset_path, perfect_model):
        out = tmp_path / "eval"
        assert main(["evaluate", "--model", perfect_model, "--dataset", dataset_path, "--out", str(out)]) == EXIT_OK
        metrics = json.loads((out / "metrics.json").read_text())
        for target in TARGET_NAMES:
            report = metrics["targets"][target]["all"]
            assert report["acc"] == 1.0 and report["auc"] == 1.0 and report["rmse"] == 0.0
            assert metrics["targets"][target]["train"]["rmse"] == 0.0
            assert metrics["targets"][target]["held_out"]["rmse"] == 0.0
        correlation = read_csv(tmp_path / "eval" / "correlation.csv")
        assert list(correlation["variable"]) == ["time_s", "x_m", *TARGET_NAMES]
        assert np.all(np.diag(correlation.drop(columns="variable").to_numpy()) == 1.0)
        roc = read_csv(tmp_path / "eval" / "roc_temperature_K.csv")
        assert roc["tpr"].iloc[-1] == 1.0 and roc["fpr"].iloc[-1] == 1.0

    def test_trained_model(self, tmp_path, model_path, dataset_path):
        out = tmp_path / "eval"
        assert main(["evaluate", "--model", model_path, "--dataset", dataset_path, "--out", str(out)]) == EXIT_OK
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["rows"] == 90
        for target in TARGET_NAMES:
            report = metrics["targets"][target]["all"]
            assert report["tp"] + report["fp"] + report["tn"] + report["fn"] == 90
            assert (out / f"roc_{target}.csv").is_file()


    def test_training_rows_fit_better_than_the_held_out_tail(self, tmp_path, dataset_path):
        model = tmp_path / "fit.json"
        args = ["train", "--dataset", dataset_path, "--out", str(model), "--epochs", "200", *TRAIN_FLAGS]
        assert main(args) == EXIT_OK
        out = tmp_path / "eval"
        assert main(["evaluate", "--model", str(model), "--dataset", dataset_path, "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "metrics.json").read_text())["targets"]["temperature_K"]
        assert report["train"]["rmse"] < report["held_out"]["rmse"]


class TestCompare:
    @pytest.fixture
    def profile_path(self, tmp_path, config_path):
        assert main(["simulate", "--config", config_path, "--out", str(tmp_path / "sim")]) == EXIT_OK
        return str(tmp_path / "sim" / "profile.csv")

    def test_identity_predictor(self, tmp_path, profile_path, perfect_model, capsys):
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--profile", profile_path, "--model", perfect_model, "--out", str(out)]) == EXIT_OK
        comparison = read_csv(out)
        assert list(comparison.columns) == ["time_s", "x_m", "T_numeric", "T_lstm", "abs_err"]
        assert len(comparison) == len(read_csv(profile_path))
        assert np.all(comparison["abs_err"] == 0.0)
        assert "max abs err 0 K" in capsys.readouterr().out

    def test_with_model(self, tmp_path, profile_path, model_path):
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--profile", profile_path, "--model", model_path, "--out", str(out)]) == EXIT_OK
        assert len(read_csv(out)) == 22

    def test_timing_manifest(self, tmp_path, profile_path, model_path, capsys):
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--profile", profile_path, "--model", model_path, "--out", str(out)]) == EXIT_OK
        manifest = json.loads((tmp_path / "cmp_manifest.json").read_text())
        solver = json.loads((tmp_path / "sim" / "manifest.json").read_text())
        timing = manifest["diagnostics"]
        assert timing["solver_seconds"] == solver["elapsed_s"] > 0
        assert timing["predictor_seconds"] > 0
        assert timing["speedup"] == pytest.approx(timing["solver_seconds"] / timing["predictor_seconds"])
        assert manifest["config_hash"] == solver["config_hash"]
        assert "solver " in capsys.readouterr().out

    def test_profile_without_solver_manifest(self, tmp_path, profile_path, model_path):
        (tmp_path / "sim" / "manifest.json").unlink()
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--profile", profile_path, "--model", model_path, "--out", str(out)]) == EXIT_OK
        timing = json.loads((tmp_path / "cmp_manifest.json").read_text())["diagnostics"]
        assert timing["solver_seconds"] is None and timing["speedup"] is None

    def test_overfit_model_tracks_the_profile(self, tmp_path):
        config = write_json(tmp_path / "short.json", OVERFIT_CONFIG)
        assert main(["simulate", "--config", config, "--out", str(tmp_path / "sim")]) == EXIT_OK
        profile = read_csv(tmp_path / "sim" / "profile.csv")
        dataset = write_csv(profile.assign(run_id=0)[["run_id", *DATASET_COLUMNS]], tmp_path / "rows.csv")
        model = tmp_path / "overfit.json"
        args = ["train", "--dataset", str(dataset), "--out", str(model), "--epochs", "200",
                "--window", "4", "--hidden", "8", "--batch-size", "8"]
        assert main(args) == EXIT_OK
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--profile", str(tmp_path / "sim" / "profile.csv"), "--model", str(model),
                     "--out", str(out)]) == EXIT_OK
        assert read_csv(out)["abs_err"].mean() < 2.0

    def test_schema_mismatch(self, tmp_path, model_path, dataset_path):
        args = ["compare", "--profile", dataset_path, "--model", model_path, "--out", str(tmp_path / "c.csv")]
        assert main(args) == EXIT_INPUT


# the default slab and schedule on a coarser grid and time step
REDUCED_DEFAULT = {"grid": {"n_nodes": 41}, "time": {"dt_s": 0.5}}
REDUCED_FLAGS = ["--epochs", "20", "--window", "16", "--hidden", "16", "--batch-size", "32", "--seed", "42"]


class TestSolverToSurrogate:
    def _held_out_temperature(self, tmp_path, document):
        config = write_json(tmp_path / "reduced.json", document)
        dataset = tmp_path / "dataset.csv"
        assert main(["dataset", "--config", config, "--out", str(dataset)]) == EXIT_OK
        assert len(read_csv(dataset)) == 101 * 41
        model = tmp_path / "model.json"
        assert main(["train", "--dataset", str(dataset), "--out", str(model), *REDUCED_FLAGS]) == EXIT_OK
        out = tmp_path / "eval"
        assert main(["evaluate", "--model", str(model), "--dataset", str(dataset), "--out", str(out)]) == EXIT_OK
        return json.loads((out / "metrics.json").read_text())["targets"]["temperature_K"]["held_out"]

    def test_held_front_r2(self, tmp_path):
        report = self._held_out_temperature(tmp_path, {**REDUCED_DEFAULT, "bc": {"after_ramp": "hold"}})
        assert report["r2"] > 0.95

    def test_dropped_front_rmse(self, tmp_path):
        # the tail after 80 s sits within a few hundredths of a kelvin of 300 K
        report = self._held_out_temperature(tmp_path, REDUCED_DEFAULT)
        assert report["rmse"] < 0.1
