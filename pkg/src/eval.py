# eval.py
"""Error metrics, capped ROC area, and instance-to-bag score aggregation."""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from src.bags import BagSet
from src.errors import DomainError, LengthMismatch, SingleClass
from src.measure import FuzzyMeasure
from src.optimizer import predict


class ErrorKind(str, enum.Enum):
    CLASSIFICATION = "cls"
    REGRESSION = "reg"


class Aggregation(str, enum.Enum):
    MEAN = "mean"
    MAX = "max"
    MIN = "min"


_REDUCERS = {
    Aggregation.MEAN: np.add,
    Aggregation.MAX: np.maximum,
    Aggregation.MIN: np.minimum,
}


class RocCurve(NamedTuple):
    far: np.ndarray
    pd: np.ndarray


# ──────────────────────────────────────────────────────────────────────
# Point errors
# ──────────────────────────────────────────────────────────────────────
def relative_error(kind: ErrorKind | str, y: float, yhat: float) -> float:
    """|y − ŷ| for classification; |(y − ŷ)/y| for regression, falling back
    to |y − ŷ| when y = 0."""
    kind = ErrorKind(kind)
    if not (math.isfinite(y) and math.isfinite(yhat)):
        raise DomainError(f"non-finite input y={y!r}, yhat={yhat!r}")
    diff = abs(y - yhat)
    if kind is ErrorKind.CLASSIFICATION:
        return diff
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"regression truth must lie in [0, 1], got {y!r}")
    return diff if y == 0.0 else diff / y


def _paired(truth, preds) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(truth, dtype=np.float64).ravel()
    yhat = np.asarray(preds, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise LengthMismatch(f"{y.size} truth values vs {yhat.size} predictions")
    if y.size == 0:
        raise LengthMismatch("nothing to compare")
    return y, yhat


def mean_relative_error(kind: ErrorKind | str, truth, preds) -> float:
    y, yhat = _paired(truth, preds)
    return math.fsum(relative_error(kind, float(a), float(b)) for a, b in zip(y, yhat)) / y.size


def rmse(truth, preds) -> float:
    y, yhat = _paired(truth, preds)
    return math.sqrt(math.fsum((yhat - y) ** 2) / y.size)


# ──────────────────────────────────────────────────────────────────────
# ROC
# ──────────────────────────────────────────────────────────────────────
def roc_curve(scores, labels) -> RocCurve:
    """(FAR, PD) after each distinct descending threshold, starting at (0, 0).

    Tied scores cross the threshold together, so the curve does not depend
    on their order.
    """
    s, y = _paired(scores, labels)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DomainError("ROC labels must be 0 or 1")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs both positive and negative samples")

    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    ends = np.append(np.flatnonzero(np.diff(s)), s.size - 1)
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    far = np.concatenate([[0.0], fp / n_neg])
    pd = np.concatenate([[0.0], tp / n_pos])
    return RocCurve(far, pd)


def roc_auc_capped(scores, labels, far_cap: float = 1e-3) -> float:
    """Trapezoidal ROC area over FAR ∈ [0, far_cap]; a perfect detector scores far_cap."""
    if not 0.0 < far_cap <= 1.0:
        raise DomainError(f"far_cap must lie in (0, 1], got {far_cap!r}")
    far, pd = roc_curve(scores, labels)
    k = int(np.searchsorted(far, far_cap, side="right"))
    x, y = far[:k], pd[:k]
    if k < far.size:
        f0, f1, p0, p1 = far[k - 1], far[k], pd[k - 1], pd[k]
        x = np.append(x, far_cap)
        y = np.append(y, p0 + (p1 - p0) * (far_cap - f0) / (f1 - f0))
    return float(trapezoid(y, x))


# ──────────────────────────────────────────────────────────────────────
# Aggregation / baselines
# ──────────────────────────────────────────────────────────────────────
def aggregate(scores: np.ndarray, bags: BagSet, aggregation: Aggregation | str = Aggregation.MEAN) -> np.ndarray:
    """Per-bag reduction of per-instance scores laid out in BagSet row order."""
    agg = Aggregation(aggregation)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (bags.num_instances,):
        raise LengthMismatch(f"{scores.size} scores for {bags.num_instances} instances")
    if not len(bags):
        return np.empty(0)
    out = _REDUCERS[agg].reduceat(scores, bags.offsets)
    return out / bags.sizes if agg is Aggregation.MEAN else out


def predict_bags(
    bagset: BagSet, measure: FuzzyMeasure, aggregation: Aggregation | str = Aggregation.MEAN
) -> np.ndarray:
    return aggregate(predict(measure, bagset), bagset, aggregation)


def baseline_fusion(instances, rule: Aggregation | str) -> np.ndarray:
    """Plain min / max / mean across sources: the untrained fusion baselines."""
    x = np.asarray(instances, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError(f"expected an (N, m) array, got shape {x.shape}")
    rule = Aggregation(rule)
    if rule is Aggregation.MEAN:
        return x.mean(axis=1)
    return x.max(axis=1) if rule is Aggregation.MAX else x.min(axis=1)
