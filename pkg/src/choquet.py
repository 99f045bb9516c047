# choquet.py
"""Discrete Choquet integral, sorted chains, usage counts, Möbius oracle.

For an instance h sorted so that h(1) ≥ h(2) ≥ … ≥ h(m), the chain is
A_k = {sources of the k largest values} and

    CI(h) = Σ_k [h(k) − h(k+1)] · g(A_k),   h(m+1) := 0.

Ties are broken by ascending source index so chains (and therefore usage
counts) are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from src.errors import DimensionMismatch, MeasureError, RangeError
from src.measure import FuzzyMeasure

if TYPE_CHECKING:
    from src.bags import BagSet

MOBIUS_MAX_SOURCES = 12


@dataclass(frozen=True)
class Chains:
    """Sorted chains of a batch of instances.

    positions[n, k] is the value-array position (mask − 1) of A_k for
    instance n, gaps[n, k] the matching h(k) − h(k+1).
    """

    num_sources: int
    positions: np.ndarray
    gaps: np.ndarray

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def masks(self) -> np.ndarray:
        return self.positions + 1


@dataclass(frozen=True)
class UsageCounts:
    num_sources: int
    counts: np.ndarray  # length 2^m − 1, counts[mask − 1]

    def of(self, mask: int) -> int:
        return int(self.counts[mask - 1])

    @property
    def non_full(self) -> np.ndarray:
        """Counts without the pinned full-set element."""
        return self.counts[:-1]


def as_instance(instance, num_sources: int) -> np.ndarray:
    arr = np.asarray(instance, dtype=np.float64)
    if arr.shape != (num_sources,):
        raise DimensionMismatch(f"instance has shape {arr.shape}, measure expects ({num_sources},)")
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise RangeError(f"instance {arr} has confidences outside [0, 1]")
    return arr


def sort_chains(instances: np.ndarray) -> Chains:
    """Chains for an (N, m) batch; stable sort gives the ascending-index tie-break."""
    x = np.asarray(instances, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected an (N, m) array, got shape {x.shape}")
    m = x.shape[1]
    order = np.argsort(-x, axis=1, kind="stable")
    # bits are distinct along a row, so a running sum is a running OR
    masks = np.cumsum(np.left_shift(1, order), axis=1)
    h = np.take_along_axis(x, order, axis=1)
    gaps = h - np.concatenate([h[:, 1:], np.zeros((h.shape[0], 1))], axis=1)
    return Chains(num_sources=m, positions=(masks - 1).astype(np.intp), gaps=gaps)


def sort_chain(instance) -> list[int]:
    """Bitmasks A_1 ⊂ A_2 ⊂ … ⊂ A_m for one instance."""
    arr = np.asarray(instance, dtype=np.float64)
    return [int(v) for v in sort_chains(arr[None, :]).masks[0]]


def choquet_integral(measure: FuzzyMeasure, instance) -> float:
    h = as_instance(instance, measure.num_sources)
    return float(choquet_batch(measure.values, sort_chains(h[None, :]))[0])


def choquet_batch(values: np.ndarray, chains: Chains) -> np.ndarray:
    """CI of every chained instance under one measure (values shape (2^m−1,))
    or a stack of measures (shape (K, 2^m−1)) → (N,) or (K, N)."""
    g = np.asarray(values)
    if g.shape[-1] != (1 << chains.num_sources) - 1:
        raise DimensionMismatch(
            f"measure has {g.shape[-1]} elements, instances need {(1 << chains.num_sources) - 1}"
        )
    # explicit product-sum: per-row rounding must not depend on the batch shape
    return (g[..., chains.positions] * chains.gaps).sum(axis=-1)


def usage_counts(bagset: BagSet) -> UsageCounts:
    """How often each element appears in the training chains (full set included)."""
    m = bagset.num_sources
    size = (1 << m) - 1
    counts = np.bincount(bagset.chains.positions.ravel(), minlength=size).astype(np.int64)
    return UsageCounts(num_sources=m, counts=counts)


# ──────────────────────────────────────────────────────────────────────
# Möbius-form oracle
# ──────────────────────────────────────────────────────────────────────
def mobius_transform(measure: FuzzyMeasure) -> np.ndarray:
    """μ(A) = Σ_{B⊆A} (−1)^{|A∖B|} g(B), indexed by mask (μ(∅) = 0 at 0)."""
    m = measure.num_sources
    mu = np.concatenate([[0.0], measure.values])
    idx = np.arange(1 << m)
    for i in range(m):
        bit = 1 << i
        hit = idx[(idx & bit) != 0]
        mu[hit] -= mu[hit ^ bit]
    return mu


def mobius_choquet_oracle(measure: FuzzyMeasure, instance) -> float:
    m = measure.num_sources
    if m > MOBIUS_MAX_SOURCES:
        raise MeasureError(f"Möbius oracle limited to {MOBIUS_MAX_SOURCES} sources, got {m}")
    h = as_instance(instance, m)
    mu = mobius_transform(measure)
    mins = np.empty(1 << m)
    mins[0] = np.inf
    for mask in range(1, 1 << m):
        low = mask & -mask
        mins[mask] = min(mins[mask ^ low], h[low.bit_length() - 1])
    return math.fsum(mu[1:] * mins[1:])
