# optimizer.py
"""Evolutionary search over monotone fuzzy measures.

Each iteration every population member produces one child, either by a
small-scale mutation (one element, chosen in proportion to how often the
training chains use it) or a large-scale one (every element, most-used
first). Parents and children are pooled, the best quarter of the pool
survives outright and the rest of the next generation is drawn from the
remaining three quarters with fitness-proportional weights.

The legacy "VI" sampler (always resample the element with the widest valid
interval) is kept for runtime comparisons.
"""

from __future__ import annotations

import enum
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from src.bags import BagSet
from src.choquet import UsageCounts, choquet_batch, usage_counts
from src.config import settings
from src.constants import SELECT_EPS
from src.errors import DimensionMismatch, DomainError, EmptyBagSet, InvalidStd, MiciError, SizeMismatch
from src.measure import (
    FuzzyMeasure,
    InitMode,
    Lattice,
    interval_in,
    check_monotone,
    init_measure,
    lattice,
)
from src.objectives import ObjectiveSpec, check_labels, evaluate

log = logging.getLogger(__name__)

# rng stream tags: every random decision draws from (seed, tag, iteration, member)
_INIT, _MUTATE, _SELECT = 0, 1, 2


class Sampler(str, enum.Enum):
    ME = "me"   # usage-count driven small/large mutations
    VI = "vi"   # widest valid interval, uniform resample


# ──────────────────────────────────────────────────────────────────────
# Config / result types
# ──────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 30
    max_iterations: int = 5000
    fit_threshold: float = 1e-4
    eta: float = 0.8
    sampler: Sampler = Sampler.ME
    seed: int = 0
    stall_iterations: int = 50
    workers: int = 1
    validate_population: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sampler", Sampler(self.sampler))
        if self.population < 2 or self.population % 2:
            raise MiciError(f"population must be a positive even number, got {self.population}")
        if self.max_iterations < 0:
            raise MiciError(f"max_iterations must be ≥ 0, got {self.max_iterations}")
        if not self.fit_threshold > 0:
            raise MiciError(f"fit_threshold must be > 0, got {self.fit_threshold}")
        if not 0.0 <= self.eta <= 1.0:
            raise MiciError(f"eta must lie in [0, 1], got {self.eta}")
        if self.stall_iterations < 1 or self.workers < 1:
            raise MiciError("stall_iterations and workers must be ≥ 1")
        if self.seed < 0:
            raise MiciError(f"seed must be ≥ 0, got {self.seed}")

    @classmethod
    def from_settings(cls, **overrides: Any) -> OptimizerConfig:
        base = dict(
            population=settings.population,
            max_iterations=settings.max_iterations,
            fit_threshold=settings.fit_threshold,
            eta=settings.eta,
            sampler=settings.sampler,
            stall_iterations=settings.stall_iterations,
            workers=settings.workers,
            validate_population=settings.validate_population,
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def to_dict(self) -> dict[str, Any]:
        blob = asdict(self)
        blob["sampler"] = self.sampler.value
        return blob


@dataclass
class TrainedModel:
    best_measure: FuzzyMeasure
    best_objective: float
    objective: ObjectiveSpec
    config: OptimizerConfig
    iterations_run: int
    trace: list[float] = field(default_factory=list)      # best-so-far, entry 0 = initial population
    wallclock_ms: list[float] = field(default_factory=list)
    reason: str = "max_iterations"

    def iterations_to(self, level: float) -> int | None:
        """First iteration whose best-so-far objective is at or below `level`."""
        for t, value in enumerate(self.trace):
            if value <= level:
                return t
        return None


# ──────────────────────────────────────────────────────────────────────
# Sampling primitives
# ──────────────────────────────────────────────────────────────────────
def sample_truncated_gaussian(
    mean: float, std: float, lo: float, hi: float, rng: np.random.Generator
) -> float:
    """Inverse-CDF draw from N(mean, std²) restricted to [lo, hi]."""
    if lo > hi:
        raise DomainError(f"empty range [{lo}, {hi}]")
    if lo == hi:
        return lo
    if not (std > 0 and np.isfinite(std)):
        raise InvalidStd(f"std must be positive and finite, got {std!r}")
    a, b = (lo - mean) / std, (hi - mean) / std
    u = rng.random()
    if a > 0:
        # upper tail: invert the survival function to keep precision
        qa, qb = ndtr(-a), ndtr(-b)
        z = -ndtri(qa - u * (qa - qb))
    else:
        pa, pb = ndtr(a), ndtr(b)
        z = ndtri(pa + u * (pb - pa))
    x = mean + std * z
    if not np.isfinite(x):  # truncated mass underflowed
        x = mean
    return float(min(max(x, lo), hi))


def _resample(values: np.ndarray, lat: Lattice, mask: int, rng: np.random.Generator) -> None:
    """Redraw one element in place inside its current valid interval."""
    lo, hi = interval_in(values, lat, mask)
    if hi <= lo:
        values[mask - 1] = lo
        return
    values[mask - 1] = sample_truncated_gaussian(values[mask - 1], (hi - lo) / 4.0, lo, hi, rng)


class _Mutator:
    """Usage-count derived sampling tables, built once per training set."""

    def __init__(self, counts: UsageCounts):
        self.counts = counts
        self.lattice = lattice(counts.num_sources)
        v = counts.non_full.astype(np.float64)
        total = v.sum()
        if total > 0:
            self.probs = v / total
        else:
            log.debug("all usage counts are zero; small mutations pick elements uniformly")
            self.probs = np.full(v.size, 1.0 / v.size) if v.size else v
        masks = np.arange(1, v.size + 1)
        # descending count, ties by ascending bitmask
        self.large_order = [int(x) for x in masks[np.lexsort((masks, -v))]]

    def small(self, measure: FuzzyMeasure, rng: np.random.Generator) -> FuzzyMeasure:
        if not self.probs.size:
            return measure
        mask = int(rng.choice(self.probs.size, p=self.probs)) + 1
        values = measure.values.copy()
        _resample(values, self.lattice, mask, rng)
        return FuzzyMeasure(measure.num_sources, values)

    def large(self, measure: FuzzyMeasure, rng: np.random.Generator) -> FuzzyMeasure:
        values = measure.values.copy()
        for mask in self.large_order:
            _resample(values, self.lattice, mask, rng)
        return FuzzyMeasure(measure.num_sources, values)


def _check_counts(measure: FuzzyMeasure, counts: UsageCounts) -> None:
    if counts.num_sources != measure.num_sources:
        raise DimensionMismatch(
            f"usage counts are for {counts.num_sources} sources, measure has {measure.num_sources}"
        )


def mutate_small(measure: FuzzyMeasure, counts: UsageCounts, rng: np.random.Generator) -> FuzzyMeasure:
    """Resample one non-full element picked with probability v_l / Σ v."""
    _check_counts(measure, counts)
    return _Mutator(counts).small(measure, rng)


def mutate_large(measure: FuzzyMeasure, counts: UsageCounts, rng: np.random.Generator) -> FuzzyMeasure:
    """Resample every non-full element, most-used first, each against the
    partially updated measure."""
    _check_counts(measure, counts)
    return _Mutator(counts).large(measure, rng)


def mutate_valid_interval(measure: FuzzyMeasure, rng: np.random.Generator) -> FuzzyMeasure:
    lat = measure.lattice
    best_mask, best = 0, None
    for mask in range(1, lat.full):
        iv = interval_in(measure.values, lat, mask)
        if best is None or iv.width > best.width:
            best_mask, best = mask, iv
    if best is None or best.width <= 0:
        return measure
    v = min(max(rng.uniform(best.lower, best.upper), best.lower), best.upper)
    return measure.replace({best_mask: v})


# ──────────────────────────────────────────────────────────────────────
# Selection
# ──────────────────────────────────────────────────────────────────────
def _select_indices(objectives: np.ndarray, keep: int, rng: np.random.Generator) -> np.ndarray:
    n_elite = keep // 2
    order = np.argsort(objectives, kind="stable")
    elites = order[:n_elite]
    rest = np.setdiff1d(np.arange(objectives.size), elites)
    weights = objectives.max() - objectives[rest] + SELECT_EPS
    drawn = rng.choice(rest, size=keep - n_elite, replace=False, p=weights / weights.sum())
    return np.concatenate([elites, drawn])


def select_next_generation(
    parents: Sequence[FuzzyMeasure],
    children: Sequence[FuzzyMeasure],
    objectives,
    rng: np.random.Generator,
) -> list[FuzzyMeasure]:
    """Keep the best P/2 of the pooled 2P, draw P/2 more from the rest."""
    obj = np.asarray(objectives, dtype=np.float64)
    if len(parents) != len(children) or obj.shape != (len(parents) + len(children),):
        raise SizeMismatch(
            f"{len(parents)} parents, {len(children)} children, {obj.size} objectives"
        )
    pool = list(parents) + list(children)
    return [pool[i] for i in _select_indices(obj, len(parents), rng)]


# ──────────────────────────────────────────────────────────────────────
# Training
# ──────────────────────────────────────────────────────────────────────
def _stream(seed: int, tag: int, iteration: int, member: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag, iteration, member])


def _stack(measures: Sequence[FuzzyMeasure]) -> np.ndarray:
    return np.stack([g.values for g in measures])


class _Evaluator:
    def __init__(self, spec: ObjectiveSpec, bags: BagSet, workers: int):
        self.spec, self.bags, self.workers = spec, bags, workers
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def __call__(self, measures: Sequence[FuzzyMeasure]) -> np.ndarray:
        stack = _stack(measures)
        if self._pool is None:
            return np.atleast_1d(evaluate(self.spec, stack, self.bags))
        chunks = np.array_split(stack, min(self.workers, len(stack)))
        parts = self._pool.map(lambda c: np.atleast_1d(evaluate(self.spec, c, self.bags)), chunks)
        return np.concatenate(list(parts))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()


def _validate(population: Sequence[FuzzyMeasure], iteration: int) -> None:
    for p, g in enumerate(population):
        if g.values[-1] != 1.0 or np.any((g.values < 0.0) | (g.values > 1.0)):
            raise MiciError(f"iteration {iteration}: member {p} left the unit range or lost g(C)=1")
        check_monotone(g.num_sources, g.values)


def train(bags: BagSet, spec: ObjectiveSpec, config: OptimizerConfig | None = None) -> TrainedModel:
    config = config or OptimizerConfig.from_settings()
    if not len(bags):
        raise EmptyBagSet("cannot train on an empty bag set")
    check_labels(spec, bags)
    m, P = bags.num_sources, config.population

    t0 = time.perf_counter()
    population = [init_measure(m, InitMode.COIN_FLIP, _stream(config.seed, _INIT, 0, p)) for p in range(P)]
    counts = usage_counts(bags)
    mutator = _Mutator(counts)
    evaluator = _Evaluator(spec, bags, config.workers)

    log.info(
        "training %s on %d bags / %d instances (m=%d, P=%d, sampler=%s, seed=%d)",
        spec.kind.value, len(bags), bags.num_instances, m, P, config.sampler.value, config.seed,
    )
    try:
        obj = evaluator(population)
        k = int(np.argmin(obj))
        best_measure, best = population[k], float(obj[k])
        trace = [best]
        clock = [(time.perf_counter() - t0) * 1e3]
        reason, t = "max_iterations", 0

        while t < config.max_iterations:
            t += 1
            children = []
            for p, g in enumerate(population):
                rng = _stream(config.seed, _MUTATE, t, p)
                if config.sampler is Sampler.VI:
                    children.append(mutate_valid_interval(g, rng))
                elif rng.random() < config.eta:
                    children.append(mutator.small(g, rng))
                else:
                    children.append(mutator.large(g, rng))

            pool = population + children
            pool_obj = np.concatenate([obj, evaluator(children)])
            keep = _select_indices(pool_obj, P, _stream(config.seed, _SELECT, t, 0))
            population = [pool[i] for i in keep]
            obj = pool_obj[keep]

            k = int(np.argmin(obj))
            if obj[k] < best:
                best_measure, best = population[k], float(obj[k])
            trace.append(best)
            clock.append((time.perf_counter() - t0) * 1e3)

            if config.validate_population:
                _validate(population, t)
            if t % 100 == 0:
                log.debug("iter %d best %.6g", t, best)

            stall = config.stall_iterations
            if t >= stall and abs(trace[-1 - stall] - best) <= config.fit_threshold:
                reason = "converged"
                break
    finally:
        evaluator.close()

    log.info("stopped after %d iterations (%s), best objective %.6g", t, reason, best)
    return TrainedModel(
        best_measure=best_measure,
        best_objective=best,
        objective=spec,
        config=config,
        iterations_run=t,
        trace=trace,
        wallclock_ms=clock,
        reason=reason,
    )


def predict(measure: FuzzyMeasure, bags: BagSet) -> np.ndarray:
    """Per-instance CI scores, in BagSet row order."""
    if bags.num_sources != measure.num_sources:
        raise DimensionMismatch(f"bags have {bags.num_sources} sources, measure has {measure.num_sources}")
    return choquet_batch(measure.values, bags.chains)
