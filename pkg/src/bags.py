# bags.py
"""Bags of instances (multiple-instance data) and the bag collection type.

An instance is a length-m vector of source confidences in [0, 1]. Labels
attach to bags only: binary {0, 1} for two-class fusion, any real in [0, 1]
for regression.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, overload

import numpy as np

from src.errors import DimensionMismatch, EmptyBagSet, LabelOutOfRange, RangeError

if TYPE_CHECKING:
    from src.choquet import Chains


@dataclass(frozen=True, eq=False)
class Bag:
    bag_id: str
    label: float
    instances: np.ndarray  # (n, m)

    def __post_init__(self):
        arr = np.array(self.instances, dtype=np.float64, ndmin=2)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise EmptyBagSet(f"bag {self.bag_id!r} needs at least one instance, got shape {arr.shape}")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise RangeError(f"bag {self.bag_id!r} has confidences outside [0, 1]")
        label = float(self.label)
        if not 0.0 <= label <= 1.0:
            raise LabelOutOfRange(f"bag {self.bag_id!r} label {label!r} outside [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "instances", arr)
        object.__setattr__(self, "label", label)

    @property
    def size(self) -> int:
        return self.instances.shape[0]

    @property
    def num_sources(self) -> int:
        return self.instances.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bag):
            return NotImplemented
        return (
            self.bag_id == other.bag_id
            and self.label == other.label
            and np.array_equal(self.instances, other.instances)
        )


class BagSet(Sequence[Bag]):
    """Ordered, immutable collection of bags sharing one source count.

    Flattened views (`instances`, `offsets`, `labels`) and the sorted
    chains are computed once and reused by every objective evaluation.
    """

    def __init__(self, bags: Iterable[Bag], num_sources: int | None = None):
        self._bags = tuple(bags)
        widths = {b.num_sources for b in self._bags}
        if num_sources is not None:
            widths.add(num_sources)
        if len(widths) > 1:
            raise DimensionMismatch(f"bags disagree on source count: {sorted(widths)}")
        if not widths:
            raise EmptyBagSet("an empty BagSet needs an explicit num_sources")
        self.num_sources: int = widths.pop()

    # sequence protocol -----------------------------------------------
    def __len__(self) -> int:
        return len(self._bags)

    @overload
    def __getitem__(self, i: int) -> Bag: ...
    @overload
    def __getitem__(self, i: slice) -> BagSet: ...

    def __getitem__(self, i):
        if isinstance(i, slice):
            return BagSet(self._bags[i], self.num_sources)
        return self._bags[i]

    def __iter__(self) -> Iterator[Bag]:
        return iter(self._bags)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BagSet):
            return NotImplemented
        return self.num_sources == other.num_sources and self._bags == other._bags

    def __repr__(self) -> str:
        return f"BagSet({len(self)} bags, {self.num_instances} instances, m={self.num_sources})"

    # flattened views -------------------------------------------------
    @cached_property
    def instances(self) -> np.ndarray:
        if not self._bags:
            return np.empty((0, self.num_sources))
        arr = np.concatenate([b.instances for b in self._bags], axis=0)
        arr.setflags(write=False)
        return arr

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([b.size for b in self._bags], dtype=np.intp)

    @cached_property
    def offsets(self) -> np.ndarray:
        """Start row of each bag inside `instances`."""
        return np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(np.intp) if self._bags else np.empty(0, np.intp)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.array([b.label for b in self._bags], dtype=np.float64)

    @cached_property
    def chains(self) -> Chains:
        from src.choquet import sort_chains
        return sort_chains(self.instances)

    @property
    def num_instances(self) -> int:
        return int(self.sizes.sum()) if self._bags else 0

    @property
    def ids(self) -> list[str]:
        return [b.bag_id for b in self._bags]

    def is_binary(self) -> bool:
        return bool(np.all((self.labels == 0.0) | (self.labels == 1.0)))

    def positives(self) -> np.ndarray:
        return self.labels == 1.0
