import csv
import json

import pytest

from ctbnlearn import benchmark
from ctbnlearn.benchmark import (RESULT_COLUMNS, ExperimentPlan, format_tables, load_plan, read_results,
                                 replicate_seed, run_benchmark)

SMALL = dict(nodes=[5], densities=[0.2], cardinalities=[2], trajectories=[50], replicates=3,
             algorithms=["ctss", "ctpc-chi2"])


def untimed(path):
    idx = RESULT_COLUMNS.index("wall_seconds")
    with open(path, newline="") as fh:
        return [row[:idx] for row in csv.reader(fh)]


def test_plan_validation():
    with pytest.raises(ValueError):
        ExperimentPlan(nodes=[])
    with pytest.raises(ValueError):
        ExperimentPlan(replicates=0)
    with pytest.raises(ValueError):
        ExperimentPlan(algorithms=["ges"])
    with pytest.raises(ValueError):
        ExperimentPlan.from_dict({"nodez": [5]})


def test_bundled_plans():
    default = load_plan("default")
    assert default.nodes == (5, 10) and default.densities == (0.1, 0.2)
    assert default.cardinalities == (2, 3) and default.trajectories == (100,) and default.replicates == 3
    assert ExperimentPlan.from_dict(default.to_dict()) == default
    assert len(default.cells()) == 8


def test_replicate_seeds_are_distinct():
    seeds = {replicate_seed(0, c, r) for c in range(8) for r in range(10)}
    assert len(seeds) == 80
    assert replicate_seed(1, 0, 0) != replicate_seed(0, 0, 0)


def test_small_plan_bookkeeping(tmp_path):
    plan = ExperimentPlan.from_dict(SMALL)
    summary = run_benchmark(plan, tmp_path)
    rows = read_results(tmp_path / "results.csv")
    assert len(rows) == 6
    assert list(rows[0]) == RESULT_COLUMNS
    assert [s["algorithm"] for s in summary] == ["ctss", "ctpc-chi2"]
    assert all(s["complete"] and s["replicates"] == 3 for s in summary)
    assert summary[1]["delta_bic_percent_mean"] == summary[1]["delta_bic_percent_mean"]  # not NaN
    assert "f1 for ctss" in (tmp_path / "tables.md").read_text()
    with open(tmp_path / "summary.csv") as fh:
        assert len(list(csv.reader(fh))) == 3


def test_resume_is_idempotent(tmp_path):
    plan = ExperimentPlan.from_dict(SMALL)
    run_benchmark(plan, tmp_path)
    first = untimed(tmp_path / "results.csv")
    run_benchmark(plan, tmp_path)
    assert untimed(tmp_path / "results.csv") == first
    # simulate an interrupted run: drop the last replicate
    lines = (tmp_path / "results.csv").read_text().splitlines(keepends=True)
    (tmp_path / "results.csv").write_text("".join(lines[:-2]))
    run_benchmark(plan, tmp_path)
    assert untimed(tmp_path / "results.csv") == first


def test_jobs_and_reruns_match(tmp_path):
    plan = ExperimentPlan.from_dict({**SMALL, "cardinalities": [2, 3], "algorithms": list(benchmark.ALGORITHMS),
                                     "replicates": 2, "trajectories": [20]})
    run_benchmark(plan, tmp_path / "a")
    run_benchmark(plan, tmp_path / "b", jobs=3)
    run_benchmark(plan, tmp_path / "c")
    a = untimed(tmp_path / "a" / "results.csv")
    assert a == untimed(tmp_path / "b" / "results.csv") == untimed(tmp_path / "c" / "results.csv")


def test_failures_mark_cell_incomplete(tmp_path, monkeypatch):
    real = benchmark._learn

    def flaky(plan, algorithm, dataset):
        if algorithm == "ctpc-chi2":
            raise RuntimeError("boom")
        return real(plan, algorithm, dataset)

    monkeypatch.setattr(benchmark, "_learn", flaky)
    summary = run_benchmark(ExperimentPlan.from_dict({**SMALL, "replicates": 1}), tmp_path)
    assert [s["algorithm"] for s in summary] == ["ctss"]
    plan = ExperimentPlan.from_dict({**SMALL, "replicates": 2})
    monkeypatch.setattr(benchmark, "_learn", real)
    summary = run_benchmark(plan, tmp_path)
    assert all(s["complete"] for s in summary)
    assert len(read_results(tmp_path / "results.csv")) == 4


def test_tables_layout():
    summary = [{"n": 5, "density": d, "cardinality": 2, "h": 100, "algorithm": "ctss",
                "f1_mean": 1.0, "f1_sd": 0.0} for d in (0.1, 0.2)]
    text = format_tables(summary)
    assert "| 2 | 5 | 1.000 (±0.000) | 1.000 (±0.000) |" in text
