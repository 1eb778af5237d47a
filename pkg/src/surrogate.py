"""
Single-layer LSTM surrogate trained on solver time series.

Cell, for z = [h_prev, x]:

    f = sigmoid(W_f z + b_f)    i = sigmoid(W_i z + b_i)
    c = tanh(W_c z + b_c)       o = sigmoid(W_o z + b_o)
    C' = f * C + i * c          h' = o * tanh(C')

followed by a linear head y = W_y h + b_y. Sequences are time-major:
(steps, batch, features). Training is plain mini-batch SGD with full
backpropagation through each window; the objective is the squared error
summed over a window's steps and outputs, averaged over the windows of a
batch.

Each row of a (run, node) sequence is predicted from its own time and
position plus the solver values of the row before it, so a window of rows
maps onto the next value of every row in it.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist
from scipy.special import expit

from errors import (
    CheckpointFormatError,
    ConfigError,
    DimensionError,
    InputError,
    SizeError,
    TrainingDivergedError,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 2
PARAM_NAMES = ("W_f", "W_i", "W_c", "W_o", "b_f", "b_i", "b_c", "b_o", "W_y", "b_y")
GATES = ("f", "i", "c", "o")

FEATURE_NAMES = ("time_s", "x_m")
TARGET_NAMES = ("temperature_K", "q_rad_W_m2", "q_cond_W_m2")
LAG_PREFIX = "prev_"
INPUT_NAMES = FEATURE_NAMES + tuple(LAG_PREFIX + name for name in TARGET_NAMES)


@dataclass
class LstmParams:
    W_f: np.ndarray
    W_i: np.ndarray
    W_c: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray
    W_y: np.ndarray
    b_y: np.ndarray

    def __post_init__(self):
        for name in PARAM_NAMES:
            setattr(self, name, np.array(getattr(self, name), dtype=float))
        H, HI = self.W_f.shape
        if HI <= H:
            raise DimensionError(f"W_f has shape {self.W_f.shape}; expected hidden x (hidden + input)")
        for gate in GATES:
            if getattr(self, f"W_{gate}").shape != (H, HI):
                raise DimensionError(f"W_{gate} has shape {getattr(self, f'W_{gate}').shape}, expected {(H, HI)}")
            if getattr(self, f"b_{gate}").shape != (H,):
                raise DimensionError(f"b_{gate} has shape {getattr(self, f'b_{gate}').shape}, expected ({H},)")
        if self.W_y.ndim != 2 or self.W_y.shape[1] != H:
            raise DimensionError(f"W_y has shape {self.W_y.shape}, expected (output, {H})")
        if self.b_y.shape != (self.W_y.shape[0],):
            raise DimensionError(f"b_y has shape {self.b_y.shape}, expected ({self.W_y.shape[0]},)")

    @property
    def hidden_size(self) -> int:
        return self.W_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_f.shape[1] - self.W_f.shape[0]

    @property
    def output_size(self) -> int:
        return self.W_y.shape[0]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "LstmParams":
        return LstmParams(**{name: value.copy() for name, value in self.arrays().items()})


@dataclass(frozen=True)
class LstmState:
    h: np.ndarray
    C: np.ndarray

    @classmethod
    def zeros(cls, hidden_size: int, batch: Tuple[int, ...] = ()) -> "LstmState":
        shape = batch + (hidden_size,)
        return cls(h=np.zeros(shape), C=np.zeros(shape))


def init_params(input_size: int, hidden_size: int, output_size: int, seed: int = 42, scale: float = 0.1) -> LstmParams:
    """Uniform(-scale, scale) initialization drawn in PARAM_NAMES order."""
    rng = np.random.default_rng(seed)
    shapes = {
        "W_f": (hidden_size, hidden_size + input_size),
        "W_i": (hidden_size, hidden_size + input_size),
        "W_c": (hidden_size, hidden_size + input_size),
        "W_o": (hidden_size, hidden_size + input_size),
        "b_f": (hidden_size,),
        "b_i": (hidden_size,),
        "b_c": (hidden_size,),
        "b_o": (hidden_size,),
        "W_y": (output_size, hidden_size),
        "b_y": (output_size,),
    }
    return LstmParams(**{name: rng.uniform(-scale, scale, shapes[name]) for name in PARAM_NAMES})


def _gates(params: LstmParams, z: np.ndarray):
    f = expit(z @ params.W_f.T + params.b_f)
    i = expit(z @ params.W_i.T + params.b_i)
    c = np.tanh(z @ params.W_c.T + params.b_c)
    o = expit(z @ params.W_o.T + params.b_o)
    return f, i, c, o


def lstm_cell(params: LstmParams, state: LstmState, x_t: np.ndarray) -> LstmState:
    x_t = np.asarray(x_t, dtype=float)
    if x_t.shape[-1:] != (params.input_size,):
        raise DimensionError(f"input has {x_t.shape[-1:]} features, expected {params.input_size}")
    if state.h.shape[-1:] != (params.hidden_size,) or state.C.shape != state.h.shape:
        raise DimensionError(f"state shapes {state.h.shape}/{state.C.shape} do not match hidden size {params.hidden_size}")
    z = np.concatenate([state.h, x_t], axis=-1)
    f, i, c, o = _gates(params, z)
    C = f * state.C + i * c
    return LstmState(h=o * np.tanh(C), C=C)


def _as_batched(xs: np.ndarray, input_size: int) -> Tuple[np.ndarray, bool]:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 2:
        xs, batched = xs[:, None, :], False
    elif xs.ndim == 3:
        batched = True
    else:
        raise DimensionError(f"sequence must be (steps, features) or (steps, batch, features), got {xs.shape}")
    if xs.shape[0] == 0:
        raise InputError("empty sequence")
    if xs.shape[-1] != input_size:
        raise DimensionError(f"sequence has {xs.shape[-1]} features, expected {input_size}")
    return xs, batched


def _forward(params: LstmParams, xs: np.ndarray) -> Dict[str, np.ndarray]:
    """Unroll over (steps, batch, input); keeps every intermediate for backprop."""
    steps, batch, _ = xs.shape
    H = params.hidden_size
    h = np.zeros((steps + 1, batch, H))
    C = np.zeros((steps + 1, batch, H))
    z = np.empty((steps, batch, H + params.input_size))
    gates = {g: np.empty((steps, batch, H)) for g in GATES}
    for t in range(steps):
        z[t] = np.concatenate([h[t], xs[t]], axis=-1)
        f, i, c, o = _gates(params, z[t])
        C[t + 1] = f * C[t] + i * c
        h[t + 1] = o * np.tanh(C[t + 1])
        gates["f"][t], gates["i"][t], gates["c"][t], gates["o"][t] = f, i, c, o
    y = h[1:] @ params.W_y.T + params.b_y
    return {"h": h, "C": C, "z": z, "y": y, **gates}


def forward_sequence(params: LstmParams, xs: np.ndarray) -> np.ndarray:
    """Outputs y_t for every step, starting from a zero state."""
    xs, batched = _as_batched(xs, params.input_size)
    y = _forward(params, xs)["y"]
    return y if batched else y[:, 0, :]


def loss_and_gradients(params: LstmParams, xs: np.ndarray, targets: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Squared error summed over steps and outputs, averaged over the batch, and its BPTT gradient."""
    xs, batched = _as_batched(xs, params.input_size)
    targets = np.asarray(targets, dtype=float)
    if not batched:
        targets = targets[:, None, :]
    cache = _forward(params, xs)
    y = cache["y"]
    if targets.shape != y.shape:
        raise DimensionError(f"targets have shape {targets.shape}, expected {y.shape}")

    error = y - targets
    n_windows = error.shape[1]
    loss = float(np.sum(error ** 2)) / n_windows
    dy = 2.0 * error / n_windows

    H = params.hidden_size
    grads = {name: np.zeros_like(value) for name, value in params.arrays().items()}
    grads["W_y"] = np.einsum("tbo,tbh->oh", dy, cache["h"][1:])
    grads["b_y"] = dy.sum(axis=(0, 1))

    dh_next = np.zeros(y.shape[1:2] + (H,))
    dC_next = np.zeros_like(dh_next)
    for t in range(xs.shape[0] - 1, -1, -1):
        f, i, c, o = (cache[g][t] for g in GATES)
        C_prev, C_t = cache["C"][t], cache["C"][t + 1]
        tanh_C = np.tanh(C_t)

        dh = dy[t] @ params.W_y + dh_next
        dC = dh * o * (1.0 - tanh_C ** 2) + dC_next
        da = {
            "f": dC * C_prev * f * (1.0 - f),
            "i": dC * c * i * (1.0 - i),
            "c": dC * i * (1.0 - c ** 2),
            "o": dh * tanh_C * o * (1.0 - o),
        }
        dz = np.zeros_like(cache["z"][t])
        for g in GATES:
            grads[f"W_{g}"] += da[g].T @ cache["z"][t]
            grads[f"b_{g}"] += da[g].sum(axis=0)
            dz += da[g] @ getattr(params, f"W_{g}")
        dh_next = dz[:, :H]
        dC_next = dC * f
    return loss, grads


def clip_gradients(grads: Dict[str, np.ndarray], clip_norm: float) -> float:
    """Scale all gradients in place so their global L2 norm is at most clip_norm; returns the norm before clipping."""
    norm = float(np.sqrt(sum(np.sum(g ** 2) for g in grads.values())))
    if clip_norm > 0 and norm > clip_norm:
        scale = clip_norm / norm
        for g in grads.values():
            g *= scale
    return norm


class TrainingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hidden_size: int = Field(32, ge=1)
    window: int = Field(16, ge=1)
    lr: float = Field(0.01, ge=0)
    epochs: int = Field(200, ge=0)
    seed: int = 42
    clip_norm: float = Field(5.0, gt=0)
    batch_size: int = Field(32, ge=1)
    train_fraction: float = Field(0.8, gt=0, le=1)
    init_scale: float = Field(0.1, gt=0)
    reduce_tau: float = Field(0.0, ge=0)
    log_every: int = Field(10, ge=1)


@dataclass
class TrainingResult:
    params: LstmParams
    # (epoch, train_mse, test_mse); epoch 0 is the initialization
    loss_curve: List[Tuple[int, float, float]]


def _mse(params: LstmParams, xs: np.ndarray, ys: np.ndarray) -> float:
    if xs.shape[1] == 0:
        return float("nan")
    return float(np.mean((forward_sequence(params, xs) - ys) ** 2))


def train_bptt(
    train_x: np.ndarray,
    train_y: np.ndarray,
    hyper: TrainingConfig,
    test_x: Optional[np.ndarray] = None,
    test_y: Optional[np.ndarray] = None,
    params: Optional[LstmParams] = None,
) -> TrainingResult:
    """Fit windows (steps, n_windows, features) -> (steps, n_windows, targets).

    Windows are reshuffled every epoch with a generator seeded from
    ``hyper.seed``; gradients of each mini-batch are clipped to
    ``hyper.clip_norm`` before the SGD update.
    """
    train_x, _ = _as_batched(train_x, train_x.shape[-1])
    train_y = np.asarray(train_y, dtype=float)
    if train_y.shape[:2] != train_x.shape[:2]:
        raise DimensionError(f"targets {train_y.shape} do not match inputs {train_x.shape}")
    if test_x is None:
        test_x = np.zeros(train_x.shape[:1] + (0,) + train_x.shape[2:])
        test_y = np.zeros(train_y.shape[:1] + (0,) + train_y.shape[2:])
    if params is None:
        params = init_params(train_x.shape[-1], hyper.hidden_size, train_y.shape[-1], hyper.seed, hyper.init_scale)

    rng = np.random.default_rng(hyper.seed)
    n_windows = train_x.shape[1]
    curve = [(0, _mse(params, train_x, train_y), _mse(params, test_x, test_y))]
    logger.info(
        "training: %d windows of %d steps, hidden %d, lr %g, %d epochs, initial mse %.6g",
        n_windows, train_x.shape[0], params.hidden_size, hyper.lr, hyper.epochs, curve[0][1],
    )
    for epoch in range(1, hyper.epochs + 1):
        order = rng.permutation(n_windows)
        for start in range(0, n_windows, hyper.batch_size):
            batch = order[start:start + hyper.batch_size]
            loss, grads = loss_and_gradients(params, train_x[:, batch], train_y[:, batch])
            if not np.isfinite(loss):
                error_msg = f"training diverged at epoch {epoch}: loss {loss}"
                logger.error(error_msg)
                raise TrainingDivergedError(error_msg, epoch=epoch)
            clip_gradients(grads, hyper.clip_norm)
            for name, grad in grads.items():
                getattr(params, name)[...] -= hyper.lr * grad

        train_mse = _mse(params, train_x, train_y)
        if not np.isfinite(train_mse):
            error_msg = f"training diverged at epoch {epoch}: train mse {train_mse}"
            logger.error(error_msg)
            raise TrainingDivergedError(error_msg, epoch=epoch)
        curve.append((epoch, train_mse, _mse(params, test_x, test_y)))
        if epoch % hyper.log_every == 0 or epoch == hyper.epochs:
            logger.info("epoch %d: train mse %.6g, test mse %.6g", *curve[-1])
    return TrainingResult(params=params, loss_curve=curve)


def mahalanobis_reduce(
    features: np.ndarray,
    tau: float,
    covariance: Optional[np.ndarray] = None,
    eps: float = 1e-8,
) -> np.ndarray:
    """Greedy thinning in row order: a row is dropped when it lies closer
    than ``tau`` to a row already retained. Returns the retained indices."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[0] < 2:
        raise SizeError(f"mahalanobis_reduce needs at least 2 rows, got {features.shape[0]}")
    d = features.shape[1]
    if covariance is None:
        covariance = np.atleast_2d(np.cov(features, rowvar=False))
    covariance = np.asarray(covariance, dtype=float)
    if covariance.shape != (d, d):
        raise DimensionError(f"covariance has shape {covariance.shape}, expected {(d, d)}")
    if np.linalg.matrix_rank(covariance) < d:
        covariance = covariance + eps * np.eye(d)
    inverse = np.linalg.inv(covariance)

    retained = [0]
    for row in range(1, features.shape[0]):
        distances = cdist(features[row:row + 1], features[retained], metric="mahalanobis", VI=inverse)
        if not np.any(distances < tau):
            retained.append(row)
    logger.info("mahalanobis_reduce: kept %d of %d rows at tau=%g", len(retained), features.shape[0], tau)
    return np.array(retained, dtype=int)


@dataclass(frozen=True)
class Normalizer:
    names: Tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.mean) / self.std

    def invert(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"names": list(self.names), "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Normalizer":
        return cls(names=tuple(data["names"]), mean=np.array(data["mean"], dtype=float), std=np.array(data["std"], dtype=float))


def fit_normalizer(rows: np.ndarray, names: Sequence[str]) -> Normalizer:
    """Per-column mean and population standard deviation."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(names):
        raise DimensionError(f"rows have shape {rows.shape}, expected (n, {len(names)})")
    if rows.shape[0] < 2:
        raise InputError(f"fit_normalizer needs at least 2 rows, got {rows.shape[0]}")
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    for name, s in zip(names, std):
        if not s > 0:
            error_msg = f"feature '{name}' has zero variance and cannot be normalized"
            logger.error(error_msg)
            raise ConfigError(error_msg)
    return Normalizer(names=tuple(names), mean=mean, std=std)


@dataclass
class SequenceTable:
    """Rows of a dataset grouped into time-ordered sequences."""

    inputs: List[np.ndarray]
    targets: List[np.ndarray]
    rows: List[np.ndarray] = field(default_factory=list)


def group_sequences(
    frame: pd.DataFrame,
    feature_names: Sequence[str] = FEATURE_NAMES,
    target_names: Optional[Sequence[str]] = TARGET_NAMES,
) -> SequenceTable:
    """One sequence per (run_id, x_m), ordered by time."""
    required = list(feature_names) + list(target_names or [])
    missing = [name for name in required if name not in frame.columns]
    if missing:
        raise InputError(f"dataset is missing columns {missing}")
    keys = [key for key in ("run_id", "x_m") if key in frame.columns]
    table = SequenceTable(inputs=[], targets=[], rows=[])
    for _, group in frame.groupby(keys, sort=True) if keys else [(None, frame)]:
        group = group.sort_values("time_s", kind="stable")
        table.inputs.append(group[list(feature_names)].to_numpy(dtype=float))
        table.targets.append(group[list(target_names)].to_numpy(dtype=float) if target_names else None)
        table.rows.append(group.index.to_numpy())
    return table


def lagged_inputs(features: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Append the previous row's targets to every row of a sequence.

    The first row has no predecessor and carries its own targets.
    """
    previous = np.concatenate([targets[:1], targets[:-1]], axis=0)
    return np.concatenate([features, previous], axis=1)


def split_point(length: int, train_fraction: float) -> int:
    """Index of the first held-out step of a sequence (chronological split)."""
    return int(np.floor(train_fraction * length))


def sliding_windows(values: np.ndarray, window: int, first_end: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Windows (window, n, features) of consecutive rows whose last row index
    lies in [max(first_end, window - 1), stop)."""
    stop = len(values) if stop is None else stop
    ends = range(max(first_end, window - 1), stop)
    if not len(ends):
        return np.zeros((window, 0, values.shape[1]))
    return np.stack([values[end - window + 1:end + 1] for end in ends], axis=1)


@dataclass
class TrainingData:
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    feature_norm: Normalizer
    target_norm: Normalizer


def prepare_training_data(frame: pd.DataFrame, hyper: TrainingConfig) -> TrainingData:
    """Normalize on the training rows and cut windows.

    The first ``train_fraction`` of each sequence is training data; windows
    ending in the remaining tail form the held-out set.
    """
    table = group_sequences(frame)
    w = hyper.window
    cuts = [split_point(len(seq), hyper.train_fraction) for seq in table.inputs]
    short = [len(seq) for seq in table.inputs if len(seq) < w]
    if short:
        raise InputError(f"{len(short)} sequences are shorter than the window of {w} steps")

    sequences = [lagged_inputs(f, y) for f, y in zip(table.inputs, table.targets)]
    feature_norm = fit_normalizer(np.concatenate([s[:c] for s, c in zip(sequences, cuts)]), INPUT_NAMES)
    target_norm = fit_normalizer(np.concatenate([s[:c] for s, c in zip(table.targets, cuts)]), TARGET_NAMES)

    parts = {"train_x": [], "train_y": [], "test_x": [], "test_y": []}
    for inputs, targets, cut in zip(sequences, table.targets, cuts):
        x, y = feature_norm.apply(inputs), target_norm.apply(targets)
        parts["train_x"].append(sliding_windows(x, w, stop=cut))
        parts["train_y"].append(sliding_windows(y, w, stop=cut))
        parts["test_x"].append(sliding_windows(x, w, first_end=cut))
        parts["test_y"].append(sliding_windows(y, w, first_end=cut))
    data = {key: np.concatenate(value, axis=1) for key, value in parts.items()}
    if data["train_x"].shape[1] == 0:
        raise InputError(f"no training windows: sequences need at least {w} rows before the held-out tail")

    if hyper.reduce_tau > 0:
        described = np.concatenate([data["train_x"].mean(axis=0), data["train_y"].mean(axis=0)], axis=1)
        keep = mahalanobis_reduce(described, hyper.reduce_tau)
        data["train_x"], data["train_y"] = data["train_x"][:, keep], data["train_y"][:, keep]

    logger.info("prepared %d training and %d held-out windows", data["train_x"].shape[1], data["test_x"].shape[1])
    return TrainingData(feature_norm=feature_norm, target_norm=target_norm, **data)


@dataclass
class Checkpoint:
    params: LstmParams
    feature_norm: Normalizer
    target_norm: Normalizer
    window: int
    train_fraction: float = 0.8


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> Path:
    params = checkpoint.params
    document = {
        "format_version": FORMAT_VERSION,
        "hidden_size": params.hidden_size,
        "input_size": params.input_size,
        "output_size": params.output_size,
        "window": checkpoint.window,
        "train_fraction": checkpoint.train_fraction,
        "feature_names": list(checkpoint.feature_norm.names),
        "target_names": list(checkpoint.target_norm.names),
        "params": {name: value.tolist() for name, value in params.arrays().items()},
        "normalizers": {
            "features": checkpoint.feature_norm.to_dict(),
            "targets": checkpoint.target_norm.to_dict(),
        },
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"checkpoint not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        error_msg = f"{path}: checkpoint format_version {version!r}, expected {FORMAT_VERSION}"
        logger.error(error_msg)
        raise CheckpointFormatError(error_msg)
    try:
        params = LstmParams(**{name: document["params"][name] for name in PARAM_NAMES})
        checkpoint = Checkpoint(
            params=params,
            feature_norm=Normalizer.from_dict(document["normalizers"]["features"]),
            target_norm=Normalizer.from_dict(document["normalizers"]["targets"]),
            window=int(document["window"]),
            train_fraction=float(document.get("train_fraction", 0.8)),
        )
    except KeyError as e:
        raise CheckpointFormatError(f"{path}: checkpoint is missing {e}") from e
    sizes = (document.get("hidden_size"), document.get("input_size"), document.get("output_size"))
    if sizes != (params.hidden_size, params.input_size, params.output_size):
        raise CheckpointFormatError(f"{path}: declared sizes {sizes} do not match the stored matrices")
    if len(checkpoint.feature_norm.names) != params.input_size:
        raise CheckpointFormatError(
            f"{path}: {len(checkpoint.feature_norm.names)} normalized inputs for an input size of {params.input_size}"
        )
    return checkpoint


def predict_sequence(params: LstmParams, inputs: np.ndarray, window: int) -> np.ndarray:
    """One output row per input row using stride-1 windows.

    Row j >= window - 1 takes the last output of the window ending at j;
    earlier rows take their position in the first window. Sequences shorter
    than the window run as a single window.
    """
    n = len(inputs)
    if n <= window:
        return forward_sequence(params, inputs)
    windows = sliding_windows(inputs, window)
    outputs = forward_sequence(params, windows)
    return np.concatenate([outputs[:window - 1, 0], outputs[-1]], axis=0)


class SurrogatePredictor:
    """One-step-ahead inference with a trained checkpoint.

    Each row is predicted from its time and position and the observed
    targets of the row before it in the same (run, node) sequence, so the
    frame must carry the target columns as well.
    """

    def __init__(self, checkpoint: Checkpoint):
        self.checkpoint = checkpoint

    @classmethod
    def from_path(cls, path: Union[str, Path]) -> "SurrogatePredictor":
        return cls(load_checkpoint(path))

    @property
    def feature_names(self) -> Tuple[str, ...]:
        return self.checkpoint.feature_norm.names

    @property
    def target_names(self) -> Tuple[str, ...]:
        return self.checkpoint.target_norm.names

    @property
    def train_fraction(self) -> float:
        return self.checkpoint.train_fraction

    @property
    def required_columns(self) -> Tuple[str, ...]:
        lagged = {LAG_PREFIX + name for name in self.target_names}
        return tuple(n for n in self.feature_names if n not in lagged) + self.target_names

    def predict(self, frame: pd.DataFrame) -> pd.DataFrame:
        """Predicted targets aligned with ``frame``'s index."""
        missing = [name for name in self.required_columns if name not in frame.columns]
        if missing:
            error_msg = f"dataset lacks the model's input columns {missing}"
            logger.error(error_msg)
            raise InputError(error_msg)
        ckpt = self.checkpoint
        coordinates = self.required_columns[: -len(self.target_names)]
        table = group_sequences(frame, coordinates, self.target_names)
        predicted = np.empty((len(frame), len(self.target_names)))
        positions = frame.index.get_indexer
        for inputs, targets, rows in zip(table.inputs, table.targets, table.rows):
            x = ckpt.feature_norm.apply(lagged_inputs(inputs, targets))
            outputs = predict_sequence(ckpt.params, x, ckpt.window)
            predicted[positions(rows)] = ckpt.target_norm.invert(outputs)
        return pd.DataFrame(predicted, index=frame.index, columns=list(self.target_names))
