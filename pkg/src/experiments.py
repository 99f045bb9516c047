# experiments.py
"""Synthetic sweep runs: generate, train, score against the hidden truth."""
from __future__ import annotations

import logging
import statistics
import time
from dataclasses import replace
from typing import Iterable, NamedTuple

from src.datagen import SynthConfig, SynthTask, gen_synthetic
from src.eval import ErrorKind, mean_relative_error
from src.objectives import ObjectiveSpec, training_bags
from src.optimizer import OptimizerConfig, TrainedModel, predict, train

log = logging.getLogger(__name__)


class Trial(NamedTuple):
    error: float
    model: TrainedModel
    wallclock_s: float


class SweepPoint(NamedTuple):
    value: float
    mean: float
    std: float
    errors: list[float]


def default_objective(task: SynthTask | str) -> ObjectiveSpec:
    if SynthTask(task) is SynthTask.CONTAMINATION:
        return ObjectiveSpec.min_max()
    return ObjectiveSpec.regression()


def run_trial(
    task: SynthTask | str,
    sweep_value: float,
    seed: int,
    objective: ObjectiveSpec | None = None,
    config: OptimizerConfig | None = None,
) -> Trial:
    task = SynthTask(task)
    objective = objective or default_objective(task)
    config = replace(config or OptimizerConfig.from_settings(), seed=seed)
    data = gen_synthetic(SynthConfig(task=task, sweep_value=sweep_value, seed=seed))

    t0 = time.perf_counter()
    model = train(training_bags(objective, data.bags), objective, config)
    elapsed = time.perf_counter() - t0

    kind = ErrorKind.CLASSIFICATION if task is SynthTask.CONTAMINATION else ErrorKind.REGRESSION
    error = mean_relative_error(kind, data.truth, predict(model.best_measure, data.bags))
    log.debug("%s=%s seed=%d: error %.4f after %d iterations", task.value, sweep_value, seed,
              error, model.iterations_run)
    return Trial(error, model, elapsed)


def run_sweep(
    task: SynthTask | str,
    values: Iterable[float],
    seeds: Iterable[int],
    objective: ObjectiveSpec | None = None,
    config: OptimizerConfig | None = None,
) -> list[SweepPoint]:
    """Mean and population std of the relative error per sweep value."""
    seeds = list(seeds)
    points = []
    for value in values:
        errors = [run_trial(task, value, s, objective, config).error for s in seeds]
        points.append(SweepPoint(value, statistics.fmean(errors), statistics.pstdev(errors), errors))
        log.info("%s %s: %.4f (%.4f)", SynthTask(task).value, value, points[-1].mean, points[-1].std)
    return points


def iterations_to_common_level(*models: TrainedModel) -> tuple[int, ...]:
    """Iterations each run needed to reach the worst of the final objectives."""
    level = max(m.best_objective for m in models)
    return tuple(m.iterations_to(level) for m in models)
