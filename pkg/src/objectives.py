# objectives.py
"""Bag-level fitness functions. Every objective is reported "lower is better".

min-max            J_M = Σ_neg max_i CI² + Σ_pos min_j (CI − 1)²
generalized mean   max/min replaced by power means with exponents p1 ≥ 1, p2 ≤ −1
noisy-or           −ln p(X | g) with an unnormalized Gaussian kernel around μ
regression (MICIR) Σ_b min_i (CI − d_b)²

The `*_from_ci` helpers take CI values for one measure (N,) or a population
(K, N) and return one objective per measure; the optimizer calls those
directly so chains are sorted once per training set.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.bags import Bag, BagSet
from src.choquet import choquet_batch
from src.constants import LOG_FLOOR
from src.errors import (
    InvalidExponent,
    InvalidVariance,
    LabelOutOfRange,
    NonBinaryLabel,
    SchemaError,
)
from src.measure import FuzzyMeasure

log = logging.getLogger(__name__)


class ObjectiveKind(str, enum.Enum):
    MIN_MAX = "minmax"
    GENERALIZED_MEAN = "genmean"
    NOISY_OR = "noisyor"
    REGRESSION = "micir"


_PARAMS = {
    ObjectiveKind.MIN_MAX: (),
    ObjectiveKind.GENERALIZED_MEAN: ("p1", "p2"),
    ObjectiveKind.NOISY_OR: ("mu", "sigma2"),
    ObjectiveKind.REGRESSION: (),
}
_ALL_PARAMS = ("p1", "p2", "mu", "sigma2")


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: ObjectiveKind
    p1: float | None = None
    p2: float | None = None
    mu: float | None = None
    sigma2: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        wanted = _PARAMS[self.kind]
        for name in _ALL_PARAMS:
            present = getattr(self, name) is not None
            if present != (name in wanted):
                raise SchemaError(
                    f"{self.kind.value} objective {'needs' if name in wanted else 'takes no'} {name}"
                )
        if self.kind is ObjectiveKind.GENERALIZED_MEAN:
            _check_exponents(self.p1, self.p2)
        if self.kind is ObjectiveKind.NOISY_OR:
            _check_variance(self.sigma2)

    # constructors ----------------------------------------------------
    @classmethod
    def min_max(cls) -> ObjectiveSpec:
        return cls(ObjectiveKind.MIN_MAX)

    @classmethod
    def generalized_mean(cls, p1: float = 10.0, p2: float = -10.0) -> ObjectiveSpec:
        return cls(ObjectiveKind.GENERALIZED_MEAN, p1=float(p1), p2=float(p2))

    @classmethod
    def noisy_or(cls, mu: float = 1.0, sigma2: float = 0.1) -> ObjectiveSpec:
        return cls(ObjectiveKind.NOISY_OR, mu=float(mu), sigma2=float(sigma2))

    @classmethod
    def regression(cls) -> ObjectiveSpec:
        return cls(ObjectiveKind.REGRESSION)

    @property
    def needs_binary_labels(self) -> bool:
        return self.kind is not ObjectiveKind.REGRESSION

    def to_dict(self) -> dict[str, Any]:
        blob: dict[str, Any] = {"kind": self.kind.value}
        blob.update({name: getattr(self, name) for name in _PARAMS[self.kind]})
        return blob

    @classmethod
    def from_dict(cls, blob: dict[str, Any]) -> ObjectiveSpec:
        try:
            kind = ObjectiveKind(blob["kind"])
            params = {name: float(blob[name]) for name in _PARAMS[kind]}
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"malformed objective spec {blob!r}") from e
        return cls(kind, **params)


def _check_exponents(p1: float, p2: float) -> None:
    if not (p1 >= 1.0 and p2 <= -1.0 and math.isfinite(p1) and math.isfinite(p2)):
        raise InvalidExponent(f"need p1 ≥ 1 and p2 ≤ −1, got p1={p1!r}, p2={p2!r}")


def _check_variance(sigma2: float) -> None:
    if not (sigma2 > 0.0 and math.isfinite(sigma2)):
        raise InvalidVariance(f"sigma2 must be positive, got {sigma2!r}")


def _require_binary(bags: BagSet) -> None:
    if not bags.is_binary():
        raise NonBinaryLabel("two-class objectives need bag labels in {0, 1}")


# ──────────────────────────────────────────────────────────────────────
# Segment helpers (one segment per bag along the last axis)
# ──────────────────────────────────────────────────────────────────────
def _reduce(ufunc: np.ufunc, x: np.ndarray, bags: BagSet) -> np.ndarray:
    return ufunc.reduceat(x, bags.offsets, axis=-1)


def _logsumexp(z: np.ndarray, bags: BagSet) -> np.ndarray:
    top = _reduce(np.maximum, z, bags)
    top = np.where(np.isfinite(top), top, 0.0)
    spread = np.repeat(top, bags.sizes, axis=-1)
    with np.errstate(divide="ignore"):
        return top + np.log(_reduce(np.add, np.exp(z - spread), bags))


def _total(terms: np.ndarray) -> np.ndarray:
    """Ordered, compensated sum over bags so results do not depend on batching."""
    flat = np.atleast_2d(terms)
    out = np.array([math.fsum(row) for row in flat])
    return out if terms.ndim > 1 else out[0]


def _empty(ci: np.ndarray) -> np.ndarray | float:
    return np.zeros(ci.shape[:-1]) if ci.ndim > 1 else 0.0


# ──────────────────────────────────────────────────────────────────────
# Objectives on precomputed CI values
# ──────────────────────────────────────────────────────────────────────
def minmax_from_ci(ci: np.ndarray, bags: BagSet) -> np.ndarray | float:
    if not len(bags):
        return _empty(ci)
    neg = _reduce(np.maximum, ci, bags) ** 2
    pos = _reduce(np.minimum, (ci - 1.0) ** 2, bags)
    return _total(np.where(bags.positives(), pos, neg))


def genmean_from_ci(ci: np.ndarray, bags: BagSet, p1: float, p2: float) -> np.ndarray | float:
    if not len(bags):
        return _empty(ci)
    log_n = np.log(bags.sizes)
    with np.errstate(divide="ignore"):
        log_ci = np.log(ci)
    log_dev = np.log(np.maximum(np.abs(1.0 - ci), LOG_FLOOR))
    # [(1/N) Σ x^{2p}]^{1/p} = exp((logsumexp(2p·ln x) − ln N) / p)
    neg = np.exp((_logsumexp(2.0 * p1 * log_ci, bags) - log_n) / p1)
    pos = np.exp((_logsumexp(2.0 * p2 * log_dev, bags) - log_n) / p2)
    return _total(np.where(bags.positives(), pos, neg))


def noisyor_from_ci(ci: np.ndarray, bags: BagSet, mu: float, sigma2: float) -> np.ndarray | float:
    if not len(bags):
        return _empty(ci)
    miss = 1.0 - np.exp(-((ci - mu) ** 2) / (2.0 * sigma2))
    neg = _reduce(np.add, np.log(np.maximum(miss, LOG_FLOOR)), bags)
    pos = np.log(np.maximum(1.0 - _reduce(np.multiply, miss, bags), LOG_FLOOR))
    return -_total(np.where(bags.positives(), pos, neg))


def micir_from_ci(ci: np.ndarray, bags: BagSet) -> np.ndarray | float:
    if not len(bags):
        return _empty(ci)
    targets = np.repeat(bags.labels, bags.sizes)
    return _total(_reduce(np.minimum, (ci - targets) ** 2, bags))


def check_labels(spec: ObjectiveSpec, bags: BagSet) -> None:
    if spec.needs_binary_labels:
        _require_binary(bags)
    elif len(bags) and not np.all((bags.labels >= 0.0) & (bags.labels <= 1.0)):
        raise LabelOutOfRange("regression labels must lie in [0, 1]")


def evaluate(spec: ObjectiveSpec, values: np.ndarray, bags: BagSet) -> np.ndarray | float:
    """Objective for one measure's values (2^m−1,) or a stack (K, 2^m−1)."""
    ci = choquet_batch(values, bags.chains)
    if spec.kind is ObjectiveKind.MIN_MAX:
        return minmax_from_ci(ci, bags)
    if spec.kind is ObjectiveKind.GENERALIZED_MEAN:
        return genmean_from_ci(ci, bags, spec.p1, spec.p2)
    if spec.kind is ObjectiveKind.NOISY_OR:
        return noisyor_from_ci(ci, bags, spec.mu, spec.sigma2)
    return micir_from_ci(ci, bags)


# ──────────────────────────────────────────────────────────────────────
# Public per-measure entry points
# ──────────────────────────────────────────────────────────────────────
def minmax_objective(measure: FuzzyMeasure, bags: BagSet) -> float:
    _require_binary(bags)
    return float(evaluate(ObjectiveSpec.min_max(), measure.values, bags))


def genmean_objective(measure: FuzzyMeasure, bags: BagSet, p1: float, p2: float) -> float:
    _require_binary(bags)
    return float(evaluate(ObjectiveSpec.generalized_mean(p1, p2), measure.values, bags))


def noisyor_objective(measure: FuzzyMeasure, bags: BagSet, mu: float = 1.0, sigma2: float = 0.1) -> float:
    """Negated noisy-or log-likelihood."""
    _require_binary(bags)
    return float(evaluate(ObjectiveSpec.noisy_or(mu, sigma2), measure.values, bags))


def micir_objective(measure: FuzzyMeasure, bags: BagSet) -> float:
    check_labels(ObjectiveSpec.regression(), bags)
    return float(evaluate(ObjectiveSpec.regression(), measure.values, bags))


def reconstruct_bags_for_classification(bags: BagSet) -> BagSet:
    """Split every negative bag into singleton bags labelled 0.0 so the
    regression objective can be used on a two-class problem."""
    _require_binary(bags)
    out: list[Bag] = []
    for bag in bags:
        if bag.label == 1.0:
            out.append(bag)
        elif bag.size == 1:
            out.append(Bag(bag.bag_id, 0.0, bag.instances))
        else:
            out.extend(Bag(f"{bag.bag_id}#{i}", 0.0, inst) for i, inst in enumerate(bag.instances))
    return BagSet(out, bags.num_sources)


def training_bags(spec: ObjectiveSpec, bags: BagSet, split_negatives: bool = True) -> BagSet:
    """Bags as the optimizer should see them: MICIR on 0/1 labels gets its
    negative bags split into singletons."""
    if split_negatives and spec.kind is ObjectiveKind.REGRESSION and len(bags) and bags.is_binary():
        out = reconstruct_bags_for_classification(bags)
        log.info("micir on two-class bags: %d bags → %d after splitting negatives", len(bags), len(out))
        return out
    return bags
