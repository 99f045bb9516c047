### mici-fusion/main.py
"""
Command-line front end
----------------------
• train    learn a fuzzy measure from a bag CSV
• predict  per-instance and per-bag Choquet scores
• eval     relative error / RMSE / capped ROC area against a truth CSV
• synth    write a synthetic experiment (bags + hidden truth)
• bench    ME vs VI sampler runtime comparison

Exit codes: 0 ok, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import statistics
import sys
from pathlib import Path
from typing import Sequence

from src import fileio
from src.config import settings
from src.constants import FAR_CAP, SYNTH_SOURCES
from src.datagen import SynthConfig, SynthTask, gen_synthetic
from src.errors import MiciError
from src.eval import (
    Aggregation,
    ErrorKind,
    aggregate,
    mean_relative_error,
    rmse,
    roc_auc_capped,
    roc_curve,
)
from src.experiments import iterations_to_common_level, run_trial
from src.objectives import ObjectiveKind, ObjectiveSpec, training_bags
from src.optimizer import OptimizerConfig, Sampler, predict, train

log = logging.getLogger(__name__)

_METRICS = ("relerr-cls", "relerr-reg", "rmse", "auc")


# ──────────────────────────────────────────────────────────────────────
# Argument parsing
# ──────────────────────────────────────────────────────────────────────
def parse_seeds(text: str) -> list[int]:
    """'1..5' or '1,3,7'."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r} (use 1..5 or 1,2,3)") from None


def _samplers(text: str) -> list[Sampler]:
    try:
        return [Sampler(s.strip().lower()) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sampler list {text!r} (use me,vi)") from None


def _add_optimizer_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", type=ObjectiveKind, choices=list(ObjectiveKind), default=None,
                   metavar="{minmax,genmean,noisyor,micir}")
    p.add_argument("--p1", type=float, default=settings.p1)
    p.add_argument("--p2", type=float, default=settings.p2)
    p.add_argument("--mu", type=float, default=settings.mu)
    p.add_argument("--sigma2", type=float, default=settings.sigma2)
    p.add_argument("--pop", type=int, default=None, help="population size (even)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--fit-thresh", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--stall", type=int, default=None, help="iterations without improvement before stopping")
    p.add_argument("--workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mici", description="Choquet-integral fusion from bag-level labels")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn a fuzzy measure")
    p.add_argument("--data", required=True, type=Path)
    _add_optimizer_args(p)
    p.add_argument("--sampler", type=Sampler, choices=list(Sampler), default=None, metavar="{me,vi}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--trace", type=Path, default=None)
    p.add_argument("--keep-negative-bags", action="store_true",
                   help="micir on 0/1 labels: train on negative bags as given instead of one bag per instance")

    p = sub.add_parser("predict", help="score bags with a trained model")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--agg", type=Aggregation, choices=list(Aggregation), default=Aggregation.MEAN,
                   metavar="{mean,max,min}")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("eval", help="compare predictions with truth")
    p.add_argument("--preds", required=True, type=Path)
    p.add_argument("--truth", required=True, type=Path)
    p.add_argument("--metric", required=True, choices=_METRICS)
    p.add_argument("--far-cap", type=float, default=FAR_CAP)
    p.add_argument("--roc", type=Path, default=None, help="also write ROC points (auc only)")

    p = sub.add_parser("synth", help="generate a synthetic experiment")
    p.add_argument("--task", required=True, type=SynthTask, choices=list(SynthTask),
                   metavar="{contamination,primary-ratio,snr}")
    p.add_argument("--sweep", required=True, type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bags", type=int, default=None)
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--sources", type=int, default=None)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--truth", type=Path, default=None, help="default: <out stem>.truth.csv")

    p = sub.add_parser("bench", help="sampler runtime comparison")
    p.add_argument("--task", type=SynthTask, choices=list(SynthTask), default=SynthTask.CONTAMINATION,
                   metavar="{contamination,primary-ratio,snr}")
    p.add_argument("--sweep", type=float, default=0.0)
    _add_optimizer_args(p)
    p.add_argument("--samplers", type=_samplers, default=[Sampler.ME, Sampler.VI])
    p.add_argument("--seeds", type=parse_seeds, default=list(range(1, 6)))
    p.add_argument("--out", required=True, type=Path)
    return parser


def _objective(args: argparse.Namespace, default: ObjectiveKind) -> ObjectiveSpec:
    kind = args.objective or default
    if kind is ObjectiveKind.GENERALIZED_MEAN:
        return ObjectiveSpec.generalized_mean(args.p1, args.p2)
    if kind is ObjectiveKind.NOISY_OR:
        return ObjectiveSpec.noisy_or(args.mu, args.sigma2)
    return ObjectiveSpec(kind)


def _config(args: argparse.Namespace, **extra) -> OptimizerConfig:
    return OptimizerConfig.from_settings(
        population=args.pop,
        max_iterations=args.max_iter,
        fit_threshold=args.fit_thresh,
        eta=args.eta,
        stall_iterations=args.stall,
        workers=args.workers,
        **extra,
    )


# ──────────────────────────────────────────────────────────────────────
# Commands
# ──────────────────────────────────────────────────────────────────────
def cmd_train(args: argparse.Namespace) -> None:
    bags = fileio.read_bags_csv(args.data)
    spec = _objective(args, ObjectiveKind.MIN_MAX)
    bags = training_bags(spec, bags, split_negatives=not args.keep_negative_bags)
    model = train(bags, spec, _config(args, sampler=args.sampler, seed=args.seed))
    fileio.write_model(args.out, model)
    if args.trace:
        fileio.write_trace_csv(args.trace, model)
    log.info("model → %s", args.out)


def cmd_predict(args: argparse.Namespace) -> None:
    bags = fileio.read_bags_csv(args.data)
    model = fileio.read_model(args.model)
    scores = predict(model.best_measure, bags)
    fileio.write_predictions_csv(args.out, bags, scores, aggregate(scores, bags, args.agg))
    log.info("scored %d instances → %s", len(scores), args.out)


def cmd_eval(args: argparse.Namespace) -> None:
    truth = fileio.read_keyed_csv(args.truth, "label")
    preds = fileio.read_keyed_csv(args.preds, "ci_score")
    y, yhat = fileio.align(truth, preds, bag_level=args.metric == "rmse")
    if args.metric == "relerr-cls":
        value = mean_relative_error(ErrorKind.CLASSIFICATION, y, yhat)
    elif args.metric == "relerr-reg":
        value = mean_relative_error(ErrorKind.REGRESSION, y, yhat)
    elif args.metric == "rmse":
        value = rmse(y, yhat)
    else:
        value = roc_auc_capped(yhat, y, args.far_cap)
        if args.roc:
            fileio.write_roc_csv(args.roc, *roc_curve(yhat, y))
    print(f"{args.metric}\t{value:.6g}")


def cmd_synth(args: argparse.Namespace) -> None:
    cfg = SynthConfig(
        task=args.task,
        sweep_value=args.sweep,
        seed=args.seed,
        num_bags=args.bags,
        instances_per_bag=args.instances,
        num_sources=args.sources or SYNTH_SOURCES,
    )
    bags, truth = gen_synthetic(cfg)
    truth_path = args.truth or args.out.with_name(f"{args.out.stem}.truth.csv")
    fileio.write_bags_csv(args.out, bags)
    fileio.write_truth_csv(truth_path, bags, truth)
    log.info("%s sweep=%s: %d bags → %s (truth → %s)", cfg.task.value, args.sweep, len(bags), args.out, truth_path)


def cmd_bench(args: argparse.Namespace) -> None:
    default = ObjectiveKind.MIN_MAX if args.task is SynthTask.CONTAMINATION else ObjectiveKind.REGRESSION
    spec = _objective(args, default)
    rows = []
    for seed in args.seeds:
        trials = [run_trial(args.task, args.sweep, seed, spec, _config(args, sampler=s)) for s in args.samplers]
        to_level = iterations_to_common_level(*(t.model for t in trials))
        for sampler, trial, its in zip(args.samplers, trials, to_level):
            rows.append({
                "sampler": sampler.value,
                "seed": seed,
                "iterations": trial.model.iterations_run,
                "iterations_to_common_level": its,
                "wallclock_s": f"{trial.wallclock_s:.3f}",
                "best_objective": repr(trial.model.best_objective),
                "relative_error": f"{trial.error:.6g}",
            })
    fileio.write_bench_csv(args.out, rows)
    for sampler in args.samplers:
        its = [r["iterations_to_common_level"] for r in rows if r["sampler"] == sampler.value]
        log.info("sampler %s: median %.1f iterations to the common objective level over %d seeds",
                 sampler.value, statistics.median(its), len(its))


_COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "bench": cmd_bench,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=settings.log_level, format="%(asctime)s %(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # argparse: --help → 0, usage error → 2
        return int(e.code or 0)
    try:
        _COMMANDS[args.command](args)
    except (MiciError, OSError) as e:
        log.error("%s: %s", args.command, e)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
