# measure.py
"""Monotone normalized fuzzy measures on the subset lattice of m sources.

Subsets are bitmasks (bit i set ⇔ source i is in the subset). A measure
stores g(A) for every nonempty A at array position A − 1, so the full set
C = 2^m − 1 lives in the last slot. g(∅) = 0 is implied and never stored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, NamedTuple

import numpy as np

from src.constants import MAX_SOURCES
from src.errors import (
    FullSetError,
    MeasureError,
    MonotonicityError,
    NormalizationError,
    RangeError,
    SchemaError,
)


# ──────────────────────────────────────────────────────────────────────
# Lattice bookkeeping (cached per source count)
# ──────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Lattice:
    num_sources: int
    full: int
    # per-mask immediate neighbours, stored as value-array positions (mask − 1);
    # entry 0 (the empty set) is unused
    subsets: tuple[np.ndarray, ...]
    supersets: tuple[np.ndarray, ...]
    # masks grouped by cardinality, layers[k] = all masks with k sources
    layers: tuple[tuple[int, ...], ...]
    # every covering pair (A, A ∪ {i}) as positions, for vectorized checks
    edge_lo: np.ndarray
    edge_hi: np.ndarray


@lru_cache(maxsize=None)
def lattice(num_sources: int) -> Lattice:
    _check_sources(num_sources)
    m = num_sources
    full = (1 << m) - 1
    subsets: list[np.ndarray] = [np.empty(0, dtype=np.intp)]
    supersets: list[np.ndarray] = [np.empty(0, dtype=np.intp)]
    layers: list[list[int]] = [[] for _ in range(m + 1)]
    lo, hi = [], []
    bits = [1 << i for i in range(m)]
    for mask in range(1, full + 1):
        subs = [(mask ^ b) - 1 for b in bits if mask & b and mask ^ b]
        sups = [(mask | b) - 1 for b in bits if not mask & b]
        subsets.append(np.asarray(subs, dtype=np.intp))
        supersets.append(np.asarray(sups, dtype=np.intp))
        layers[mask.bit_count()].append(mask)
        lo.extend([mask - 1] * len(sups))
        hi.extend(sups)
    return Lattice(
        num_sources=m,
        full=full,
        subsets=tuple(subsets),
        supersets=tuple(supersets),
        layers=tuple(tuple(layer) for layer in layers),
        edge_lo=np.asarray(lo, dtype=np.intp),
        edge_hi=np.asarray(hi, dtype=np.intp),
    )


def _check_sources(num_sources: int) -> None:
    if not 1 <= num_sources <= MAX_SOURCES:
        raise MeasureError(f"num_sources must be in [1, {MAX_SOURCES}], got {num_sources}")


# ──────────────────────────────────────────────────────────────────────
# Types
# ──────────────────────────────────────────────────────────────────────
class ValidInterval(NamedTuple):
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


class InitMode(str, enum.Enum):
    TOP_DOWN = "top-down"
    BOTTOM_UP = "bottom-up"
    COIN_FLIP = "coin-flip"


@dataclass(frozen=True, eq=False)
class FuzzyMeasure:
    """Immutable measure value. Build through `build_measure` to validate."""

    num_sources: int
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)  # private copy
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def full(self) -> int:
        return (1 << self.num_sources) - 1

    @property
    def lattice(self) -> Lattice:
        return lattice(self.num_sources)

    def g(self, mask: int) -> float:
        return 0.0 if mask == 0 else float(self.values[mask - 1])

    def replace(self, updates: dict[int, float]) -> FuzzyMeasure:
        """New measure with some elements overwritten (mask → value), unvalidated."""
        arr = self.values.copy()
        for mask, v in updates.items():
            arr[mask - 1] = v
        return FuzzyMeasure(self.num_sources, arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FuzzyMeasure):
            return NotImplemented
        return self.num_sources == other.num_sources and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.num_sources, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"FuzzyMeasure(m={self.num_sources}, values={np.array2string(self.values, precision=4)})"

    # json ------------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        return {
            "num_sources": self.num_sources,
            "elements": [
                {"subset": mask, "value": float(v)}
                for mask, v in enumerate(self.values.tolist(), start=1)
            ],
        }

    @classmethod
    def from_dict(cls, blob: dict[str, Any]) -> FuzzyMeasure:
        try:
            m = int(blob["num_sources"])
            elements = blob["elements"]
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"measure JSON missing or malformed key: {e}") from e
        _check_sources(m)
        size = (1 << m) - 1
        if not isinstance(elements, list) or len(elements) != size:
            raise SchemaError(f"expected {size} elements for {m} sources")
        values = np.empty(size)
        seen = set()
        for el in elements:
            try:
                mask, v = int(el["subset"]), float(el["value"])
            except (KeyError, TypeError, ValueError) as e:
                raise SchemaError(f"malformed element {el!r}") from e
            if not 1 <= mask <= size or mask in seen:
                raise SchemaError(f"bad or duplicate subset {mask}")
            seen.add(mask)
            values[mask - 1] = v
        return build_measure(m, values)


# ──────────────────────────────────────────────────────────────────────
# Operations
# ──────────────────────────────────────────────────────────────────────
def build_measure(num_sources: int, values) -> FuzzyMeasure:
    """Validated constructor: range, normalization, then monotonicity."""
    _check_sources(num_sources)
    arr = np.asarray(values, dtype=np.float64)
    size = (1 << num_sources) - 1
    if arr.shape != (size,):
        raise MeasureError(f"expected {size} values for {num_sources} sources, got shape {arr.shape}")
    bad = np.flatnonzero(~((arr >= 0.0) & (arr <= 1.0)))  # also catches NaN
    if bad.size:
        k = int(bad[0])
        raise RangeError(f"g({k + 1:#b})={arr[k]!r} outside [0, 1]")
    if arr[-1] != 1.0:
        raise NormalizationError(f"g(C) must be exactly 1.0, got {arr[-1]!r}")
    check_monotone(num_sources, arr)
    return FuzzyMeasure(num_sources, arr)


def check_monotone(num_sources: int, values: np.ndarray) -> None:
    """Immediate-superset check; transitivity covers every other pair."""
    lat = lattice(num_sources)
    viol = np.flatnonzero(values[lat.edge_lo] > values[lat.edge_hi])
    if viol.size:
        k = int(viol[0])
        lo, hi = int(lat.edge_lo[k]), int(lat.edge_hi[k])
        raise MonotonicityError(lo + 1, hi + 1, float(values[lo]), float(values[hi]))


def valid_interval(measure: FuzzyMeasure, element: int) -> ValidInterval:
    """Range element `element` may move within without breaking monotonicity."""
    if element == measure.full:
        raise FullSetError("the full-set element is pinned at 1")
    if not 1 <= element < measure.full:
        raise MeasureError(f"element {element} outside the lattice")
    return interval_in(measure.values, lattice(measure.num_sources), element)


def interval_in(values: np.ndarray, lat: Lattice, element: int) -> ValidInterval:
    """Unchecked interval lookup on a raw value array (used mid-mutation)."""
    subs = lat.subsets[element]
    sups = lat.supersets[element]
    lower = float(values[subs].max()) if subs.size else 0.0
    upper = float(values[sups].min()) if sups.size else 1.0
    return ValidInterval(lower, upper)


def init_measure(num_sources: int, mode: InitMode | str, rng: np.random.Generator) -> FuzzyMeasure:
    """Random monotone measure, filled layer by layer from one end of the lattice."""
    mode = InitMode(mode)
    if mode is InitMode.COIN_FLIP:
        mode = InitMode.TOP_DOWN if rng.random() < 0.5 else InitMode.BOTTOM_UP
    lat = lattice(num_sources)
    values = np.zeros(lat.full)
    values[-1] = 1.0
    inner = range(1, num_sources)
    if mode is InitMode.TOP_DOWN:
        for k in reversed(inner):
            for mask in lat.layers[k]:
                values[mask - 1] = _uniform_in(rng, 0.0, values[lat.supersets[mask]].min())
    else:
        for k in inner:
            for mask in lat.layers[k]:
                subs = lat.subsets[mask]
                lo = values[subs].max() if subs.size else 0.0
                values[mask - 1] = _uniform_in(rng, lo, 1.0)
    return FuzzyMeasure(num_sources, values)


def _uniform_in(rng: np.random.Generator, lo: float, hi: float) -> float:
    # lo + (hi − lo)·u can round past hi
    return min(max(rng.uniform(lo, hi), lo), hi)
