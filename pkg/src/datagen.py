# datagen.py
"""Synthetic experiment data, window bags for detection grids, label scaling.

Hidden truth comes from random monotone measures, so every generated task
is realizable by some Choquet model:

* contamination: instances are uniform in [0,1]^m and kept as positive
  when their hidden CI is ≥ 0.8, negative when ≤ 0.2 (rejection sampling);
  negative bags get a chosen share of positives mixed in.
* primary ratio: each bag is a tight cloud around a random prototype;
  primary instances are shifted/scaled so their hidden CI equals the bag
  label exactly, the rest keep the cloud and get independent labels.
  Every label lies in [LABEL_FLOOR, 1] so relative errors stay bounded.
* snr: all instances primary, white noise added to every source.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from src.bags import Bag, BagSet
from src.choquet import choquet_batch, sort_chains
from src.constants import (
    CONTAMINATION_BAG_SIZE,
    CONTAMINATION_BAGS,
    LABEL_FLOOR,
    NEGATIVE_CI,
    POSITIVE_CI,
    PROTOTYPE_SPREAD,
    REGRESSION_BAG_SIZE,
    REGRESSION_BAGS,
    SYNTH_SOURCES,
)
from src.errors import (
    DegenerateRange,
    DomainError,
    InsufficientBackground,
    InvalidSweep,
    MiciError,
    RangeError,
)
from src.measure import FuzzyMeasure, InitMode, init_measure

_BATCH = 4096
_MAX_BATCHES = 20_000


class SynthTask(str, enum.Enum):
    CONTAMINATION = "contamination"
    PRIMARY_RATIO = "primary-ratio"
    SNR = "snr"


@dataclass(frozen=True)
class SynthConfig:
    task: SynthTask
    sweep_value: float
    seed: int = 0
    num_bags: int | None = None
    instances_per_bag: int | None = None
    num_sources: int = SYNTH_SOURCES

    def __post_init__(self):
        task = SynthTask(self.task)
        object.__setattr__(self, "task", task)
        classification = task is SynthTask.CONTAMINATION
        if self.num_bags is None:
            object.__setattr__(self, "num_bags", CONTAMINATION_BAGS if classification else REGRESSION_BAGS)
        if self.instances_per_bag is None:
            object.__setattr__(
                self, "instances_per_bag", CONTAMINATION_BAG_SIZE if classification else REGRESSION_BAG_SIZE
            )
        s = self.sweep_value
        if task is SynthTask.SNR:
            if not math.isfinite(s):
                raise InvalidSweep(f"SNR must be a finite number of dB, got {s!r}")
        elif not 0.0 <= s <= 1.0:
            raise InvalidSweep(f"{task.value} sweep must lie in [0, 1], got {s!r}")
        if self.num_bags < 1 or self.instances_per_bag < 1:
            raise InvalidSweep("num_bags and instances_per_bag must be ≥ 1")
        if classification and self.num_bags < 2:
            raise InvalidSweep("contamination needs at least one positive and one negative bag")


class SyntheticSet(NamedTuple):
    bags: BagSet
    truth: np.ndarray  # hidden per-instance labels, aligned with bags.instances


def _share(fraction: float, n: int) -> int:
    # round first so 0.3 · 10 counts as 3, not 4
    return min(n, math.ceil(round(fraction * n, 9)))


def _ci(measure: FuzzyMeasure, x: np.ndarray) -> np.ndarray:
    return choquet_batch(measure.values, sort_chains(x))


# ──────────────────────────────────────────────────────────────────────
# Generators
# ──────────────────────────────────────────────────────────────────────
def _rejection(measure: FuzzyMeasure, n: int, keep, rng: np.random.Generator) -> np.ndarray:
    """n uniform instances whose hidden CI passes `keep`."""
    found: list[np.ndarray] = []
    have = 0
    for _ in range(_MAX_BATCHES):
        if have >= n:
            break
        cand = rng.random((_BATCH, measure.num_sources))
        hit = cand[keep(_ci(measure, cand))]
        found.append(hit)
        have += len(hit)
    if have < n:
        raise MiciError(f"rejection sampling found only {have} of {n} instances")
    return np.concatenate(found)[:n] if n else np.empty((0, measure.num_sources))


def _contamination(cfg: SynthConfig, rng: np.random.Generator) -> SyntheticSet:
    m, n = cfg.num_sources, cfg.instances_per_bag
    hidden = init_measure(m, InitMode.COIN_FLIP, rng)
    n_pos_bags = cfg.num_bags // 2
    n_neg_bags = cfg.num_bags - n_pos_bags
    mixed = _share(cfg.sweep_value, n)

    positives = _rejection(hidden, n_pos_bags * n + n_neg_bags * mixed, lambda ci: ci >= POSITIVE_CI, rng)
    negatives = _rejection(hidden, n_neg_bags * (n - mixed), lambda ci: ci <= NEGATIVE_CI, rng)

    bags, truth = [], []
    for b in range(n_pos_bags):
        bags.append(Bag(f"b{b:03d}", 1.0, positives[b * n:(b + 1) * n]))
        truth.append(np.ones(n))
    pos_left = positives[n_pos_bags * n:]
    for k in range(n_neg_bags):
        x = np.concatenate([pos_left[k * mixed:(k + 1) * mixed], negatives[k * (n - mixed):(k + 1) * (n - mixed)]])
        y = np.concatenate([np.ones(mixed), np.zeros(n - mixed)])
        perm = rng.permutation(n)
        bags.append(Bag(f"b{n_pos_bags + k:03d}", 0.0, x[perm]))
        truth.append(y[perm])
    return SyntheticSet(BagSet(bags, m), np.concatenate(truth))


def _onto_label(hidden: FuzzyMeasure, x: np.ndarray, d: float) -> np.ndarray:
    """Shift/scale rows of x toward d so their hidden CI is exactly d.

    Relies on CI(d + s·(x − c)) = d + s·(CI(x) − c) for s ≥ 0.
    """
    c = _ci(hidden, x)[:, None]
    lo, hi = x.min(axis=1, keepdims=True), x.max(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_lo = np.where(c - lo > 0, d / (c - lo), np.inf)
        s_hi = np.where(hi - c > 0, (1.0 - d) / (hi - c), np.inf)
    s = np.minimum(1.0, np.minimum(s_lo, s_hi))
    return np.clip(d + s * (x - c), 0.0, 1.0)


def _regression(cfg: SynthConfig, rng: np.random.Generator) -> SyntheticSet:
    m, n = cfg.num_sources, cfg.instances_per_bag
    hidden = init_measure(m, InitMode.COIN_FLIP, rng)
    primary_share = 1.0 if cfg.task is SynthTask.SNR else cfg.sweep_value
    k = _share(primary_share, n)

    bag_x, bag_y, labels = [], [], []
    for _ in range(cfg.num_bags):
        d = float(rng.uniform(LABEL_FLOOR, 1.0))
        proto = rng.random(m)
        x = np.clip(proto + rng.normal(0.0, PROTOTYPE_SPREAD, (n, m)), 0.0, 1.0)
        primary = np.zeros(n, dtype=bool)
        primary[rng.choice(n, size=k, replace=False)] = True
        y = np.empty(n)
        if k:
            x[primary] = _onto_label(hidden, x[primary], d)
            y[primary] = d
        if k < n:
            y[~primary] = rng.uniform(LABEL_FLOOR, 1.0, n - k)
        bag_x.append(x)
        bag_y.append(y)
        labels.append(d)

    if cfg.task is SynthTask.SNR:
        flat = np.concatenate(bag_x)
        noisy = np.clip(add_noise(flat, cfg.sweep_value, rng), 0.0, 1.0)
        bag_x = np.split(noisy, np.cumsum([len(x) for x in bag_x])[:-1])

    bags = [Bag(f"b{b:03d}", labels[b], bag_x[b]) for b in range(cfg.num_bags)]
    return SyntheticSet(BagSet(bags, m), np.concatenate(bag_y))


def add_noise(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """White Gaussian noise at the given SNR (signal power = mean of x²), unclipped."""
    power = float(np.mean(np.square(x)))
    std = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    return x + rng.normal(0.0, std, x.shape)


def gen_synthetic(config: SynthConfig) -> SyntheticSet:
    rng = np.random.default_rng(config.seed)
    if config.task is SynthTask.CONTAMINATION:
        return _contamination(config, rng)
    return _regression(config, rng)


def separable_toy_set(
    num_bags: int = 20, instances_per_bag: int = 5, num_sources: int = 2, seed: int = 0
) -> BagSet:
    """Negative bags entirely below 0.05, each positive bag holds one instance above 0.95.

    Every bag term of the min-max objective is then under 0.0025 for any measure.
    """
    rng = np.random.default_rng(seed)
    bags = []
    for b in range(num_bags):
        if b % 2:
            bags.append(Bag(f"n{b:03d}", 0.0, rng.uniform(0.0, 0.05, (instances_per_bag, num_sources))))
        else:
            x = rng.uniform(0.0, 1.0, (instances_per_bag, num_sources))
            x[rng.integers(instances_per_bag)] = rng.uniform(0.95, 1.0, num_sources)
            bags.append(Bag(f"p{b:03d}", 1.0, x))
    return BagSet(bags, num_sources)


# ──────────────────────────────────────────────────────────────────────
# Window bags around target locations
# ──────────────────────────────────────────────────────────────────────
def build_window_bags(
    grid: np.ndarray,
    points: Sequence[tuple[int, int]],
    halo_radius: int,
    num_background: int,
    rng: np.random.Generator,
) -> BagSet:
    """One positive bag per target window, one negative bag of background pixels."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 3:
        raise DomainError(f"grid must be (rows, cols, m), got shape {grid.shape}")
    if halo_radius < 0:
        raise DomainError(f"halo_radius must be ≥ 0, got {halo_radius}")
    rows, cols, m = grid.shape
    covered = np.zeros((rows, cols), dtype=bool)
    bags = []
    for k, (r, c) in enumerate(points):
        if not (0 <= r < rows and 0 <= c < cols):
            raise DomainError(f"point {(r, c)} outside a {rows}×{cols} grid")
        r0, r1 = max(0, r - halo_radius), min(rows, r + halo_radius + 1)
        c0, c1 = max(0, c - halo_radius), min(cols, c + halo_radius + 1)
        covered[r0:r1, c0:c1] = True
        bags.append(Bag(f"target-{k:03d}", 1.0, grid[r0:r1, c0:c1].reshape(-1, m)))

    free = np.flatnonzero(~covered.ravel())
    if free.size < num_background:
        raise InsufficientBackground(f"need {num_background} background pixels, only {free.size} outside windows")
    if num_background:
        picked = np.sort(rng.choice(free, size=num_background, replace=False))
        bags.append(Bag("background", 0.0, grid.reshape(-1, m)[picked]))
    return BagSet(bags, m)


# ──────────────────────────────────────────────────────────────────────
# Scaling
# ──────────────────────────────────────────────────────────────────────
def normalize_labels(labels) -> tuple[np.ndarray, float, float]:
    """(Y − Y_min) / (Y_max − Y_min), plus the training min/max."""
    y = np.asarray(labels, dtype=np.float64)
    if y.size == 0 or not np.all(np.isfinite(y)):
        raise DegenerateRange("labels must be a nonempty array of finite numbers")
    lo, hi = float(y.min()), float(y.max())
    if not hi > lo:
        raise DegenerateRange(f"all labels equal {lo!r}; nothing to normalize")
    return (y - lo) / (hi - lo), lo, hi


def denormalize_labels(normalized, lo: float, hi: float) -> np.ndarray:
    return np.asarray(normalized, dtype=np.float64) * (hi - lo) + lo


def normalize_sources(instances, mode: str = "unity") -> np.ndarray:
    """Rescale raw source outputs column-wise into [0, 1].

    unity: per-source min-max; norm: divide each source by its Euclidean norm.
    Constant (unity) or all-zero (norm) columns map to 0.
    """
    x = np.asarray(instances, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError(f"expected an (N, m) array, got shape {x.shape}")
    if mode == "unity":
        lo, span = x.min(axis=0), np.ptp(x, axis=0)
        out = np.divide(x - lo, span, out=np.zeros_like(x), where=span > 0)
    elif mode == "norm":
        norm = np.linalg.norm(x, axis=0)
        out = np.divide(x, norm, out=np.zeros_like(x), where=norm > 0)
        if np.any(out < 0):
            raise RangeError("norm scaling needs non-negative source outputs")
    else:
        raise DomainError(f"unknown normalization mode {mode!r} (expected unity|norm)")
    return out
