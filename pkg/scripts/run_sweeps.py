#!/usr/bin/env python
"""
run_sweeps.py -- synthetic sweeps and the ME/VI sampler comparison

    python -m scripts.run_sweeps --task contamination --seeds 1..5
    python -m scripts.run_sweeps --task snr --objective micir
    python -m scripts.run_sweeps --samplers

Prints one row per sweep value: mean(std) relative error across seeds.
"""
from __future__ import annotations

import argparse
import logging
import statistics
from dataclasses import replace

from src.constants import CONTAMINATION_SWEEP, PRIMARY_RATIO_SWEEP, SNR_SWEEP_DB
from src.datagen import SynthTask
from src.experiments import default_objective, iterations_to_common_level, run_sweep, run_trial
from src.main import parse_seeds
from src.objectives import ObjectiveSpec
from src.optimizer import OptimizerConfig, Sampler

GRIDS = {
    SynthTask.CONTAMINATION: CONTAMINATION_SWEEP,
    SynthTask.PRIMARY_RATIO: PRIMARY_RATIO_SWEEP,
    SynthTask.SNR: SNR_SWEEP_DB,
}
OBJECTIVES = {
    "minmax": ObjectiveSpec.min_max,
    "genmean": ObjectiveSpec.generalized_mean,
    "noisyor": ObjectiveSpec.noisy_or,
    "micir": ObjectiveSpec.regression,
}


def sweep(task: SynthTask, objective: ObjectiveSpec, seeds: list[int], config: OptimizerConfig) -> None:
    print(f"# {task.value}  objective={objective.kind.value}  seeds={seeds}")
    for point in run_sweep(task, GRIDS[task], seeds, objective, config):
        print(f"{point.value:>6g}  {point.mean:.4f}({point.std:.4f})")


def compare_samplers(task: SynthTask, seeds: list[int], config: OptimizerConfig) -> None:
    print(f"# sampler comparison on {task.value}  seeds={seeds}")
    print("seed  me_iters  vi_iters  me_to_level  vi_to_level  me_s  vi_s")
    to_level = {Sampler.ME: [], Sampler.VI: []}
    for seed in seeds:
        me = run_trial(task, 0.0, seed, config=replace(config, sampler=Sampler.ME))
        vi = run_trial(task, 0.0, seed, config=replace(config, sampler=Sampler.VI))
        a, b = iterations_to_common_level(me.model, vi.model)
        to_level[Sampler.ME].append(a)
        to_level[Sampler.VI].append(b)
        print(f"{seed:>4}  {me.model.iterations_run:>8}  {vi.model.iterations_run:>8}  "
              f"{a:>11}  {b:>11}  {me.wallclock_s:.2f}  {vi.wallclock_s:.2f}")
    for sampler, its in to_level.items():
        print(f"# {sampler.value}: median {statistics.median(its)} iterations to the common level")


# ─────────────────── argument parsing ────────────────────
parser = argparse.ArgumentParser()
parser.add_argument("--task", type=SynthTask, choices=list(SynthTask), default=SynthTask.CONTAMINATION)
parser.add_argument("--objective", choices=sorted(OBJECTIVES), default=None,
                    help="(optional) defaults to minmax for contamination, micir otherwise")
parser.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..5"), help="e.g. 1..5 or 1,4,9")
parser.add_argument("--samplers", action="store_true", help="run the ME vs VI comparison instead")
parser.add_argument("--verbose", action="store_true")

if __name__ == "__main__":
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    config = OptimizerConfig.from_settings()
    if args.samplers:
        compare_samplers(args.task, args.seeds, config)
    else:
        objective = OBJECTIVES[args.objective]() if args.objective else default_objective(args.task)
        sweep(args.task, objective, args.seeds, config)
