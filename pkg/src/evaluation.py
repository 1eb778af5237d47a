"""Scores for surrogate predictions against solver output."""

import logging
from dataclasses import asdict, dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import ConfigError, InputError, RocError

logger = logging.getLogger(__name__)


@dataclass
class MetricsReport:
    """Counts plus rates; a rate whose denominator is zero is None."""

    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float
    acc: float
    tpr: Optional[float]
    fpr: Optional[float]
    ppv: Optional[float]
    tnr: Optional[float]
    auc: Optional[float] = None
    rmse: Optional[float] = None
    mae: Optional[float] = None
    r2: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class CorrelationMatrix:
    names: Tuple[str, ...]
    values: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=list(self.names))
        frame.insert(0, "variable", list(self.names))
        return frame


def _paired(pred, truth) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if pred.size != truth.size:
        raise InputError(f"prediction has {pred.size} values, truth has {truth.size}")
    if pred.size == 0:
        raise InputError("cannot score empty series")
    return pred, truth


def regression_metrics(pred, truth) -> Tuple[float, float]:
    """(rmse, mae) in the units of the series."""
    pred, truth = _paired(pred, truth)
    error = pred - truth
    return float(np.sqrt(np.mean(error ** 2))), float(np.mean(np.abs(error)))


def r2_score(pred, truth) -> float:
    pred, truth = _paired(pred, truth)
    total = np.sum((truth - truth.mean()) ** 2)
    if total == 0:
        raise InputError("r2 is undefined for a constant truth series")
    return float(1.0 - np.sum((pred - truth) ** 2) / total)


def pearson_matrix(columns: Mapping[str, Sequence[float]]) -> CorrelationMatrix:
    names = tuple(columns)
    data = np.array([np.asarray(columns[name], dtype=float).ravel() for name in names])
    if data.ndim != 2 or data.shape[1] < 2:
        raise InputError("pearson_matrix needs at least 2 samples of equal length per column")
    for name, row in zip(names, data):
        if np.ptp(row) == 0:
            error_msg = f"column '{name}' is constant; its correlation is undefined"
            logger.error(error_msg)
            raise ConfigError(error_msg)
    r = np.corrcoef(data)
    r = np.clip(0.5 * (r + r.T), -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(names=names, values=r)


def resolve_threshold(reference, threshold: Optional[float] = None, quantile: Optional[float] = None) -> float:
    """Exactly one of a fixed threshold or a quantile of ``reference`` (linear interpolation)."""
    if (threshold is None) == (quantile is None):
        raise ConfigError("give exactly one of threshold or quantile")
    if threshold is not None:
        return float(threshold)
    if not 0.0 <= quantile <= 1.0:
        raise ConfigError(f"quantile={quantile} must lie in [0, 1]")
    return float(np.quantile(np.asarray(reference, dtype=float), quantile))


def binarize(series, threshold: Optional[float] = None, quantile: Optional[float] = None, reference=None) -> np.ndarray:
    """label = value >= threshold; a quantile resolves against ``reference`` (default the series itself)."""
    series = np.asarray(series, dtype=float)
    cut = resolve_threshold(series if reference is None else reference, threshold, quantile)
    return series >= cut


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def roc_curve(scores, labels) -> Tuple[List[RocPoint], float]:
    """ROC points over distinct score thresholds, descending, from (0, 0) to (1, 1).

    Tied scores form one threshold group, so the trapezoid area equals the
    fraction of (positive, negative) pairs ordered correctly, ties counting 1/2.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    if scores.size != labels.size:
        raise InputError(f"{scores.size} scores for {labels.size} labels")
    P = int(labels.sum())
    N = int(labels.size - P)
    if P == 0 or N == 0:
        raise RocError(f"ROC needs both classes, got {P} positive and {N} negative labels")

    distinct, inverse = np.unique(scores, return_inverse=True)
    pos = np.bincount(inverse[labels], minlength=distinct.size)[::-1].astype(np.int64)
    neg = np.bincount(inverse[~labels], minlength=distinct.size)[::-1].astype(np.int64)
    tp = np.cumsum(pos)
    fp = np.cumsum(neg)
    area = int(np.sum(neg * (2 * (tp - pos) + pos)))
    auc = area / (2 * P * N)

    points = [RocPoint(threshold=float("inf"), fpr=0.0, tpr=0.0)]
    points += [RocPoint(float(t), int(f) / N, int(p) / P) for t, f, p in zip(distinct[::-1], fp, tp)]
    return points, auc


def confusion_and_roc(scores, labels, threshold: float) -> Tuple[MetricsReport, List[RocPoint]]:
    """Confusion counts at ``score >= threshold`` and the ROC curve.

    With a single truth class the report is still built; RocError carries it.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    if scores.size != labels.size or scores.size == 0:
        raise InputError(f"{scores.size} scores for {labels.size} labels")
    predicted = scores >= threshold
    tp = int(np.sum(predicted & labels))
    fp = int(np.sum(predicted & ~labels))
    tn = int(np.sum(~predicted & ~labels))
    fn = int(np.sum(~predicted & labels))
    report = MetricsReport(
        tp=tp, fp=fp, tn=tn, fn=fn,
        threshold=float(threshold),
        acc=(tp + tn) / scores.size,
        tpr=_ratio(tp, tp + fn),
        fpr=_ratio(fp, fp + tn),
        ppv=_ratio(tp, tp + fp),
        tnr=_ratio(tn, tn + fp),
    )
    try:
        points, report.auc = roc_curve(scores, labels)
    except RocError as e:
        logger.error(str(e))
        raise RocError(str(e), report=report) from e
    return report, points


def evaluate_target(pred, truth, quantile: float = 0.5) -> Tuple[MetricsReport, List[RocPoint]]:
    """Regression errors plus classification at the truth quantile, both on the same rows.

    The predicted values are the scores and the truth quantile is also the
    operating threshold. A single-class truth leaves auc as None and no ROC points.
    """
    pred, truth = _paired(pred, truth)
    threshold = resolve_threshold(truth, quantile=quantile)
    labels = truth >= threshold
    try:
        report, points = confusion_and_roc(pred, labels, threshold)
    except RocError as e:
        logger.warning(f"ROC skipped: {str(e)}")
        report, points = e.report, []
    report.rmse, report.mae = regression_metrics(pred, truth)
    try:
        report.r2 = r2_score(pred, truth)
    except InputError:
        report.r2 = None
    return report, points


def roc_frame(points: Sequence[RocPoint]) -> pd.DataFrame:
    return pd.DataFrame([asdict(p) for p in points], columns=["threshold", "fpr", "tpr"])
