# fileio.py
"""Bag / model / result files.

Formats
-------
bags.csv     bag_id,label,src_1,…,src_m      (header mandatory)
model.json   measure elements + objective, best objective, seed, iterations
preds.csv    bag_id,instance_idx,ci_score    (bag rows use instance_idx "*")
truth.csv    bag_id,instance_idx,label       (same keying as preds.csv)
trace.csv    iter,best_objective,wallclock_ms
roc.csv      far,pd
bench.csv    sampler,seed,iterations,iterations_to_common_level,wallclock_s,
             best_objective,relative_error

Every write goes to a temp file in the target directory and is renamed into
place, so an interrupted run never leaves a half-written artifact.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from src.bags import Bag, BagSet
from src.errors import (
    InconsistentLabel,
    LengthMismatch,
    ParseError,
    RaggedWidth,
    RangeError,
    SchemaError,
)
from src.measure import FuzzyMeasure
from src.objectives import ObjectiveSpec
from src.optimizer import OptimizerConfig, TrainedModel

log = logging.getLogger(__name__)

BAG_ROW = "*"


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    out.writerows(rows)
    return buf.getvalue()


def _num(v: float) -> str:
    return repr(float(v))


# ──────────────────────────────────────────────────────────────────────
# Bags
# ──────────────────────────────────────────────────────────────────────
def _float(cell: str, what: str, line: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{what} {cell!r} is not a number", line) from None


def read_bags_csv(path: str | Path) -> BagSet:
    """Group rows by bag_id (bags in first-seen order, rows in file order)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file, header row is mandatory", 1)
        header = [h.strip() for h in header]
        m = len(header) - 2
        if m < 1 or header[:2] != ["bag_id", "label"] or header[2:] != [f"src_{k}" for k in range(1, m + 1)]:
            raise ParseError("header must be bag_id,label,src_1,…,src_m", 1)

        labels: dict[str, float] = {}
        rows: dict[str, list[list[float]]] = {}
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != m + 2:
                raise RaggedWidth(f"expected {m + 2} fields, got {len(row)}", line)
            bag_id = row[0].strip()
            if not bag_id:
                raise ParseError("empty bag_id", line)
            label = _float(row[1], "label", line)
            if not 0.0 <= label <= 1.0:
                raise RangeError(f"label {label!r} outside [0, 1]", line)
            values = [_float(c, "source value", line) for c in row[2:]]
            if not all(0.0 <= v <= 1.0 for v in values):
                raise RangeError(f"source values {values} outside [0, 1]", line)
            first = labels.setdefault(bag_id, label)
            if first != label:
                raise InconsistentLabel(bag_id, first, label, line)
            rows.setdefault(bag_id, []).append(values)

    bags = BagSet([Bag(b, labels[b], np.array(rows[b])) for b in rows], m)
    log.info("read %d bags / %d instances from %s", len(bags), bags.num_instances, path)
    return bags


def write_bags_csv(path: str | Path, bags: BagSet) -> None:
    header = ["bag_id", "label"] + [f"src_{k}" for k in range(1, bags.num_sources + 1)]
    rows = (
        [bag.bag_id, _num(bag.label), *map(_num, inst)]
        for bag in bags
        for inst in bag.instances
    )
    atomic_write(path, _csv_text(header, rows))


# ──────────────────────────────────────────────────────────────────────
# Keyed score tables (predictions and truth)
# ──────────────────────────────────────────────────────────────────────
def _keyed_rows(bags: BagSet, per_instance, per_bag) -> Iterable[list[str]]:
    per_instance = np.asarray(per_instance, dtype=np.float64)
    if per_instance.shape != (bags.num_instances,):
        raise LengthMismatch(f"{per_instance.size} values for {bags.num_instances} instances")
    for b, bag in enumerate(bags):
        start = bags.offsets[b]
        for i in range(bag.size):
            yield [bag.bag_id, str(i), _num(per_instance[start + i])]
        if per_bag is not None:
            yield [bag.bag_id, BAG_ROW, _num(per_bag[b])]


def write_predictions_csv(path: str | Path, bags: BagSet, scores, bag_scores) -> None:
    atomic_write(path, _csv_text(["bag_id", "instance_idx", "ci_score"], _keyed_rows(bags, scores, bag_scores)))


def write_truth_csv(path: str | Path, bags: BagSet, truth) -> None:
    atomic_write(path, _csv_text(["bag_id", "instance_idx", "label"], _keyed_rows(bags, truth, bags.labels)))


def read_keyed_csv(path: str | Path, value_field: str) -> dict[tuple[str, str], float]:
    """{(bag_id, instance_idx): value} from a preds or truth file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        want = {"bag_id", "instance_idx", value_field}
        if reader.fieldnames is None or not want <= set(reader.fieldnames):
            raise ParseError(f"header must contain {sorted(want)}", 1)
        table: dict[tuple[str, str], float] = {}
        for row in reader:
            key = (row["bag_id"], row["instance_idx"])
            if key in table:
                raise ParseError(f"duplicate row for {key}", reader.line_num)
            table[key] = _float(row[value_field], value_field, reader.line_num)
    return table


def align(truth: dict, preds: dict, bag_level: bool) -> tuple[np.ndarray, np.ndarray]:
    """Matched (truth, pred) arrays over instance rows or bag rows."""
    def pick(t: dict) -> dict:
        return {k: v for k, v in t.items() if (k[1] == BAG_ROW) == bag_level}

    t, p = pick(truth), pick(preds)
    if t.keys() != p.keys():
        missing = sorted(t.keys() ^ p.keys())[:3]
        raise LengthMismatch(f"truth and predictions cover different rows, e.g. {missing}")
    keys = sorted(t)
    return np.array([t[k] for k in keys]), np.array([p[k] for k in keys])


# ──────────────────────────────────────────────────────────────────────
# Model
# ──────────────────────────────────────────────────────────────────────
def model_to_dict(model: TrainedModel) -> dict[str, Any]:
    blob = model.best_measure.to_dict()
    blob.update(
        objective=model.objective.to_dict(),
        best_objective=model.best_objective,
        seed=model.config.seed,
        iterations=model.iterations_run,
        reason=model.reason,
        config=model.config.to_dict(),
    )
    return blob


def write_model(path: str | Path, model: TrainedModel) -> None:
    atomic_write(path, json.dumps(model_to_dict(model), indent=2) + "\n")


def read_model(path: str | Path) -> TrainedModel:
    """Load and re-validate a model file (the measure goes through build_measure)."""
    try:
        blob = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(blob, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    measure = FuzzyMeasure.from_dict(blob)
    try:
        spec = ObjectiveSpec.from_dict(blob["objective"])
        config = OptimizerConfig(**blob.get("config", {"seed": blob["seed"]}))
        return TrainedModel(
            best_measure=measure,
            best_objective=float(blob["best_objective"]),
            objective=spec,
            config=config,
            iterations_run=int(blob["iterations"]),
            reason=str(blob.get("reason", "max_iterations")),
        )
    except (KeyError, TypeError) as e:
        raise SchemaError(f"{path}: missing or malformed model field {e}") from e


# ──────────────────────────────────────────────────────────────────────
# Run artifacts
# ──────────────────────────────────────────────────────────────────────
def write_trace_csv(path: str | Path, model: TrainedModel) -> None:
    rows = ([t, _num(f), f"{ms:.3f}"] for t, (f, ms) in enumerate(zip(model.trace, model.wallclock_ms)))
    atomic_write(path, _csv_text(["iter", "best_objective", "wallclock_ms"], rows))


def write_roc_csv(path: str | Path, far, pd) -> None:
    atomic_write(path, _csv_text(["far", "pd"], ([_num(a), _num(b)] for a, b in zip(far, pd))))


BENCH_FIELDS = (
    "sampler", "seed", "iterations", "iterations_to_common_level", "wallclock_s", "best_objective", "relative_error",
)


def write_bench_csv(path: str | Path, rows: Sequence[dict[str, Any]]) -> None:
    atomic_write(path, _csv_text(BENCH_FIELDS, ([r[f] for f in BENCH_FIELDS] for r in rows)))
