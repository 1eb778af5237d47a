"""
thermoflux command line.

    python src/thermoflux.py simulate --config run.json --out results/
    python src/thermoflux.py dataset  --config run.json --sweep sweep.json --out dataset.csv
    python src/thermoflux.py train    --dataset dataset.csv --out model.json --epochs 200 --lr 0.003 0.01 0.03
    python src/thermoflux.py predict  --model model.json --dataset dataset.csv --out predicted.csv
    python src/thermoflux.py evaluate --model model.json --dataset dataset.csv --out metrics/
    python src/thermoflux.py compare  --profile results/profile.csv --model model.json --out compare.csv

Exit codes: 0 success, 2 invalid input or configuration, 3 solver did not
converge, 4 training diverged.
"""

import argparse
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from config import RuntimeSettings, apply_overrides, build_simulation_config, config_hash, load_config
from errors import ConvergenceError, SolverError, ThermofluxError, TrainingDivergedError
from evaluation import evaluate_target, pearson_matrix, roc_frame
from logging_config import configure_logging
from simulation import DATASET_COLUMNS, PROFILE_COLUMNS, profile_frame, run_simulation
from surrogate import (
    FEATURE_NAMES,
    TARGET_NAMES,
    Checkpoint,
    SurrogatePredictor,
    TrainingConfig,
    TrainingData,
    TrainingResult,
    group_sequences,
    prepare_training_data,
    save_checkpoint,
    split_point,
    train_bptt,
)
from sweep_adapter import SweepAdapter, load_sweep
from tabular import read_csv, write_csv

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_DIVERGED = 4

logger = logging.getLogger("thermoflux")


class RunManifest(BaseModel):
    config_hash: Optional[str] = None
    tool_version: str = __version__
    started_at: str
    finished_at: Optional[str] = None
    outputs: List[str] = []
    status: str = "running"
    steady_state_time_s: Optional[float] = None
    elapsed_s: Optional[float] = None
    diagnostics: Dict[str, Any] = {}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(document: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    return path


def _radiation_override(radiation: Optional[str]) -> Dict[str, Any]:
    return {} if radiation is None else {"radiation.enabled": radiation == "on"}


def cmd_simulate(config_path: Optional[str], out_dir: str, radiation: Optional[str] = None) -> Path:
    started = _now()
    settings = apply_overrides(load_config(config_path), _radiation_override(radiation))
    tic = time.perf_counter()
    result = run_simulation(build_simulation_config(settings))
    elapsed = time.perf_counter() - tic

    out = Path(out_dir)
    profile_path = write_csv(profile_frame(result), out / "profile.csv")
    manifest = RunManifest(
        config_hash=config_hash(settings),
        started_at=started,
        finished_at=_now(),
        outputs=[str(profile_path)],
        status="success",
        steady_state_time_s=result.steady_state_time,
        elapsed_s=elapsed,
        diagnostics=result.diagnostics,
    )
    _write_json(manifest.model_dump(), out / "manifest.json")

    steady = f"{result.steady_state_time:g} s" if result.steady_state_time is not None else "not reached"
    print(f"profile: {profile_path} ({len(result.snapshots)} snapshots x {len(result.x)} nodes), steady state {steady}")
    return profile_path


def cmd_dataset(
    config_path: Optional[str],
    sweep_path: Optional[str],
    out_path: str,
    radiation: Optional[str] = None,
    threads: Optional[int] = None,
) -> Path:
    started = _now()
    settings = apply_overrides(load_config(config_path), _radiation_override(radiation))
    if settings.output.snapshot_every_s is None:
        settings = apply_overrides(settings, {"output.snapshot_every_s": 1.0})
    runs = load_sweep(sweep_path)
    threads = threads or RuntimeSettings().threads

    frame = SweepAdapter(settings, threads).run(runs)
    out = Path(out_path)
    try:
        write_csv(frame, out)
    except Exception:
        out.unlink(missing_ok=True)
        raise
    manifest = RunManifest(
        config_hash=config_hash(settings),
        started_at=started,
        finished_at=_now(),
        outputs=[str(out)],
        status="success",
        diagnostics={"runs": len(runs), "rows": len(frame)},
    )
    _write_json(manifest.model_dump(), out.with_name(f"{out.stem}_manifest.json"))
    return out


LR_SWEEP_COLUMNS = ["lr", "final_train_mse", "final_test_mse", "diverged_at_epoch"]


def sweep_learning_rates(
    data: TrainingData, hyper: TrainingConfig, rates: Sequence[float]
) -> Tuple[pd.DataFrame, TrainingResult, TrainingConfig]:
    """Train once per learning rate from the same seed.

    A diverged rate is recorded with its epoch and skipped. The kept run has
    the lowest final held-out mse, or training mse when there is no tail.
    """
    rows, best = [], None
    for lr in rates:
        trial = TrainingConfig(**{**hyper.model_dump(), "lr": lr})
        try:
            result = train_bptt(data.train_x, data.train_y, trial, data.test_x, data.test_y)
        except TrainingDivergedError as e:
            logger.warning(f"lr {lr:g} diverged at epoch {e.epoch}")
            rows.append({"lr": lr, "final_train_mse": np.nan, "final_test_mse": np.nan, "diverged_at_epoch": e.epoch})
            continue
        _, train_mse, test_mse = result.loss_curve[-1]
        rows.append({"lr": lr, "final_train_mse": train_mse, "final_test_mse": test_mse, "diverged_at_epoch": 0})
        score = test_mse if np.isfinite(test_mse) else train_mse
        if best is None or score < best[0]:
            best = (score, result, trial)
    if best is None:
        error_msg = f"every learning rate in {list(rates)} diverged"
        logger.error(error_msg)
        raise TrainingDivergedError(error_msg, epoch=min(row["diverged_at_epoch"] for row in rows))
    logger.info(f"keeping lr {best[2].lr:g} with final mse {best[0]:.6g}")
    return pd.DataFrame(rows, columns=LR_SWEEP_COLUMNS), best[1], best[2]


def cmd_train(dataset_path: str, out_path: str, hyper: TrainingConfig, learning_rates: Sequence[float] = ()) -> Path:
    frame = read_csv(dataset_path, DATASET_COLUMNS)
    data = prepare_training_data(frame, hyper)
    out = Path(out_path)
    if len(learning_rates) > 1:
        sweep, result, hyper = sweep_learning_rates(data, hyper, learning_rates)
        write_csv(sweep, out.with_name(f"{out.stem}_lr.csv"))
    else:
        result = train_bptt(data.train_x, data.train_y, hyper, data.test_x, data.test_y)

    checkpoint = Checkpoint(
        params=result.params,
        feature_norm=data.feature_norm,
        target_norm=data.target_norm,
        window=hyper.window,
        train_fraction=hyper.train_fraction,
    )
    save_checkpoint(checkpoint, out)
    curve = pd.DataFrame(result.loss_curve, columns=["epoch", "train_mse", "test_mse"])
    write_csv(curve, out.with_name(f"{out.stem}_loss.csv"))
    return out


def _prediction_frame(frame: pd.DataFrame, predicted: pd.DataFrame) -> pd.DataFrame:
    keys = [c for c in ("run_id",) if c in frame.columns] + list(FEATURE_NAMES)
    return pd.concat([frame[keys], predicted], axis=1)


def cmd_predict(model_path: str, dataset_path: str, out_path: str) -> Path:
    predictor = SurrogatePredictor.from_path(model_path)
    frame = read_csv(dataset_path)
    return write_csv(_prediction_frame(frame, predictor.predict(frame)), Path(out_path))


def held_out_rows(frame: pd.DataFrame, train_fraction: float) -> pd.Index:
    """Index labels of the chronological tail of every sequence."""
    table = group_sequences(frame, FEATURE_NAMES, target_names=None)
    tails = [rows[split_point(len(rows), train_fraction):] for rows in table.rows]
    return pd.Index(np.concatenate(tails)) if tails else pd.Index([])


def evaluate_predictions(frame: pd.DataFrame, predicted: pd.DataFrame, train_fraction: float = 0.8):
    """Per-target reports over all rows, the training head and the held-out
    tail of every sequence, plus ROC points over all rows."""
    tail = held_out_rows(frame, train_fraction)
    head = frame.index.difference(tail)
    reports, rocs = {}, {}
    for target in TARGET_NAMES:
        report, points = evaluate_target(predicted[target], frame[target])
        reports[target] = {"all": report.to_dict()}
        for section, rows in (("train", head), ("held_out", tail)):
            reports[target][section] = None
            if len(rows) >= 2:
                reports[target][section] = evaluate_target(predicted.loc[rows, target], frame.loc[rows, target])[0].to_dict()
        rocs[target] = points
    return reports, rocs


def cmd_evaluate(model_path: str, dataset_path: str, out_dir: str) -> Path:
    frame = read_csv(dataset_path, DATASET_COLUMNS)
    predictor = SurrogatePredictor.from_path(model_path)
    reports, rocs = evaluate_predictions(frame, predictor.predict(frame), predictor.train_fraction)

    out = Path(out_dir)
    _write_json({"rows": len(frame), "targets": reports}, out / "metrics.json")
    correlation = pearson_matrix({name: frame[name].to_numpy() for name in FEATURE_NAMES + TARGET_NAMES})
    write_csv(correlation.to_frame(), out / "correlation.csv")
    for target, points in rocs.items():
        write_csv(roc_frame(points), out / f"roc_{target}.csv")
    return out / "metrics.json"


def compare_frames(profile: pd.DataFrame, predicted: pd.DataFrame) -> pd.DataFrame:
    return pd.DataFrame({
        "time_s": profile["time_s"],
        "x_m": profile["x_m"],
        "T_numeric": profile["temperature_K"],
        "T_lstm": predicted["temperature_K"],
        "abs_err": (predicted["temperature_K"] - profile["temperature_K"]).abs(),
    })


def _solver_manifest(profile_path: Path) -> Optional[RunManifest]:
    """The manifest ``simulate`` wrote next to a profile, if there is a readable one."""
    candidate = profile_path.with_name("manifest.json")
    if not candidate.is_file():
        return None
    try:
        return RunManifest.model_validate_json(candidate.read_text(encoding="utf-8"))
    except ValidationError as e:
        logger.warning(f"ignoring {candidate}: {e.error_count()} validation errors")
        return None


def cmd_compare(profile_path: str, model_path: str, out_path: str) -> Path:
    started = _now()
    profile = read_csv(profile_path, PROFILE_COLUMNS)
    predictor = SurrogatePredictor.from_path(model_path)
    tic = time.perf_counter()
    predicted = predictor.predict(profile)
    predictor_seconds = time.perf_counter() - tic
    comparison = compare_frames(profile, predicted)
    path = write_csv(comparison, Path(out_path))

    solver = _solver_manifest(Path(profile_path))
    solver_seconds = solver.elapsed_s if solver is not None else None
    diagnostics = {
        "rows": len(comparison),
        "max_abs_err_K": float(comparison["abs_err"].max()),
        "mean_abs_err_K": float(comparison["abs_err"].mean()),
        "solver_seconds": solver_seconds,
        "predictor_seconds": predictor_seconds,
        "speedup": solver_seconds / predictor_seconds if solver_seconds and predictor_seconds > 0 else None,
    }
    manifest = RunManifest(
        config_hash=solver.config_hash if solver is not None else None,
        started_at=started,
        finished_at=_now(),
        outputs=[str(path)],
        status="success",
        diagnostics=diagnostics,
    )
    _write_json(manifest.model_dump(), path.with_name(f"{path.stem}_manifest.json"))

    timing = f"predictor {predictor_seconds:.3g} s"
    if solver_seconds is not None:
        timing += f", solver {solver_seconds:.3g} s"
    print(f"compare: {len(comparison)} rows, max abs err {comparison['abs_err'].max():.6g} K, "
          f"mean abs err {comparison['abs_err'].mean():.6g} K, {timing}")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermoflux", description="Coupled conduction-radiation solver and LSTM surrogate")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run the solver and write snapshot profiles")
    simulate.add_argument("--config")
    simulate.add_argument("--out", default="results")
    simulate.add_argument("--radiation", choices=["on", "off"])

    dataset = sub.add_parser("dataset", help="run a parameter sweep and write a training dataset")
    dataset.add_argument("--config")
    dataset.add_argument("--sweep")
    dataset.add_argument("--out", default="dataset.csv")
    dataset.add_argument("--radiation", choices=["on", "off"])

    train = sub.add_parser("train", help="fit the LSTM surrogate")
    train.add_argument("--dataset", required=True)
    train.add_argument("--out", default="model.json")
    train.add_argument("--seed", type=int, default=42)
    train.add_argument("--lr", type=float, nargs="+", default=[0.01], help="several values run a learning rate sweep")
    train.add_argument("--epochs", type=int, default=200)
    train.add_argument("--hidden", type=int, default=32)
    train.add_argument("--window", type=int, default=16)
    train.add_argument("--batch-size", type=int, default=32)
    train.add_argument("--clip-norm", type=float, default=5.0)
    train.add_argument("--reduce-tau", type=float, default=0.0)

    predict = sub.add_parser("predict", help="predict temperature and fluxes for a dataset")
    predict.add_argument("--model", required=True)
    predict.add_argument("--dataset", required=True)
    predict.add_argument("--out", default="predicted.csv")

    evaluate = sub.add_parser("evaluate", help="score a model against solver data")
    evaluate.add_argument("--model", required=True)
    evaluate.add_argument("--dataset", required=True)
    evaluate.add_argument("--out", default="evaluation")

    compare = sub.add_parser("compare", help="compare a solver profile with model predictions")
    compare.add_argument("--profile", required=True)
    compare.add_argument("--model", required=True)
    compare.add_argument("--out", default="compare.csv")
    return parser


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "simulate":
        cmd_simulate(args.config, args.out, args.radiation)
    elif args.command == "dataset":
        cmd_dataset(args.config, args.sweep, args.out, args.radiation)
    elif args.command == "train":
        hyper = TrainingConfig(
            hidden_size=args.hidden,
            window=args.window,
            lr=args.lr[0],
            epochs=args.epochs,
            seed=args.seed,
            clip_norm=args.clip_norm,
            batch_size=args.batch_size,
            reduce_tau=args.reduce_tau,
        )
        cmd_train(args.dataset, args.out, hyper, args.lr)
    elif args.command == "predict":
        cmd_predict(args.model, args.dataset, args.out)
    elif args.command == "evaluate":
        cmd_evaluate(args.model, args.dataset, args.out)
    elif args.command == "compare":
        cmd_compare(args.profile, args.model, args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv()
    runtime = RuntimeSettings()
    configure_logging(runtime.log_level, runtime.log_dir)
    try:
        _dispatch(args)
    except (ConvergenceError, SolverError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return EXIT_CONVERGENCE
    except TrainingDivergedError as e:
        logger.error(f"{args.command} failed at epoch {e.epoch}: {str(e)}")
        return EXIT_DIVERGED
    except (ThermofluxError, ValidationError, FileNotFoundError, json.JSONDecodeError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
