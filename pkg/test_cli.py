"""End-to-end runs of the `mici` command line."""

import argparse
import csv

import pytest

from src import fileio
from src.main import parse_seeds, run_cli
from src.objectives import micir_objective, reconstruct_bags_for_classification

FAST = ["--pop", "6", "--max-iter", "30", "--stall", "10"]


@pytest.fixture
def synth(tmp_path):
    def make(task="primary-ratio", sweep="1.0", seed="7", extra=()):
        out = tmp_path / f"{task}-{sweep}-{seed}.csv"
        code = run_cli(["synth", "--task", task, "--sweep", sweep, "--seed", seed, "--out", str(out), *extra])
        assert code == 0
        return out, out.with_name(f"{out.stem}.truth.csv")
    return make


class TestUsage:
    def test_unknown_flag(self, capsys):
        assert run_cli(["train", "--bogus"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_command(self):
        assert run_cli([]) == 2

    def test_help(self):
        assert run_cli(["--help"]) == 0

    def test_bad_choice(self, tmp_path):
        assert run_cli(["synth", "--task", "nope", "--sweep", "0", "--out", str(tmp_path / "x.csv")]) == 2

    @pytest.mark.parametrize("text,seeds", [("1..3", [1, 2, 3]), ("4,9", [4, 9]), ("7", [7])])
    def test_seed_lists(self, text, seeds):
        assert parse_seeds(text) == seeds

    def test_bad_seed_list(self):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seeds("1..x")
        assert run_cli(["bench", "--task", "contamination", "--seeds", "a,b", "--out", "b.csv"]) == 2

    def test_sweep_script_shares_the_seed_parser(self):
        from scripts import run_sweeps

        assert run_sweeps.parse_seeds is parse_seeds
        assert run_sweeps.parser.parse_args(["--seeds", "2..4"]).seeds == [2, 3, 4]


class TestDataErrors:
    def test_missing_file(self, tmp_path):
        assert run_cli(["train", "--data", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "m.json")]) == 1

    def test_bad_sweep(self, tmp_path):
        assert run_cli(["synth", "--task", "contamination", "--sweep", "3", "--out", str(tmp_path / "x.csv")]) == 1

    def test_regression_labels_with_binary_objective(self, synth, tmp_path):
        data, _ = synth(extra=("--bags", "3", "--instances", "4"))
        assert run_cli(["train", "--data", str(data), "--objective", "minmax", "--out", str(tmp_path / "m.json")]) == 1


class TestPipeline:
    def test_synth_writes_truth(self, synth):
        data, truth = synth(extra=("--bags", "4", "--instances", "6"))
        rows = list(csv.DictReader(truth.open()))
        assert len(rows) == 4 * 6 + 4
        assert sum(r["instance_idx"] == "*" for r in rows) == 4

    def test_train_is_deterministic(self, synth, tmp_path):
        data, _ = synth(extra=("--bags", "4", "--instances", "6"))
        for name in ("a.json", "b.json"):
            argv = ["train", "--data", str(data), "--objective", "micir", "--seed", "42", *FAST,
                    "--out", str(tmp_path / name)]
            assert run_cli(argv) == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_train_predict_eval(self, synth, tmp_path, capsys):
        data, truth = synth(task="contamination", sweep="0.2", seed="3", extra=("--bags", "10"))
        model, preds = tmp_path / "m.json", tmp_path / "p.csv"
        trace, roc = tmp_path / "trace.csv", tmp_path / "roc.csv"
        assert run_cli(["train", "--data", str(data), "--objective", "genmean", *FAST, "--out", str(model),
                        "--trace", str(trace)]) == 0
        assert run_cli(["predict", "--data", str(data), "--model", str(model), "--agg", "max",
                        "--out", str(preds)]) == 0
        capsys.readouterr()
        for metric in ("relerr-cls", "rmse", "auc"):
            argv = ["eval", "--preds", str(preds), "--truth", str(truth), "--metric", metric, "--far-cap", "0.5"]
            if metric == "auc":
                argv += ["--roc", str(roc)]
            assert run_cli(argv) == 0
        out = capsys.readouterr().out.splitlines()
        assert [line.split("\t")[0] for line in out] == ["relerr-cls", "rmse", "auc"]
        assert all(float(line.split("\t")[1]) >= 0.0 for line in out)
        assert roc.read_text().startswith("far,pd\n")
        assert trace.read_text().startswith("iter,best_objective,wallclock_ms\n")

    @pytest.mark.parametrize("flags,split", [((), True), (("--keep-negative-bags",), False)])
    def test_micir_on_two_class_data_splits_negatives(self, synth, tmp_path, flags, split):
        data, _ = synth(task="contamination", sweep="0.2", seed="5", extra=("--bags", "10"))
        out = tmp_path / "m.json"
        assert run_cli(["train", "--data", str(data), "--objective", "micir", *FAST, *flags, "--out", str(out)]) == 0
        model = fileio.read_model(out)
        bags = fileio.read_bags_csv(data)
        seen = reconstruct_bags_for_classification(bags) if split else bags
        assert model.best_objective == pytest.approx(micir_objective(model.best_measure, seen), rel=1e-12)

    def test_bench(self, tmp_path):
        out = tmp_path / "bench.csv"
        argv = ["bench", "--task", "contamination", "--samplers", "me,vi", "--seeds", "1..2", *FAST,
                "--out", str(out)]
        assert run_cli(argv) == 0
        rows = list(csv.DictReader(out.open()))
        assert [(r["sampler"], r["seed"]) for r in rows] == [("me", "1"), ("vi", "1"), ("me", "2"), ("vi", "2")]
        for seed in ("1", "2"):
            pair = [r for r in rows if r["seed"] == seed]
            assert all(int(r["iterations_to_common_level"]) <= int(r["iterations"]) for r in pair)

    @pytest.mark.slow
    def test_all_primary_regression_recovers_labels(self, synth, tmp_path, capsys):
        data, truth = synth()
        model, preds = tmp_path / "m.json", tmp_path / "p.csv"
        assert run_cli(["train", "--data", str(data), "--objective", "micir", "--fit-thresh", "1e-6",
                        "--stall", "100", "--out", str(model)]) == 0
        assert run_cli(["predict", "--data", str(data), "--model", str(model), "--out", str(preds)]) == 0
        capsys.readouterr()
        assert run_cli(["eval", "--preds", str(preds), "--truth", str(truth), "--metric", "relerr-reg"]) == 0
        value = float(capsys.readouterr().out.split("\t")[1])
        assert value < 0.05
