"""Full-factorial synthetic benchmark: generate, learn, evaluate, summarize.

Results go to an append-only long CSV (one row per cell, replicate and
algorithm). Summaries are always recomputed from that file, so an interrupted
run can be resumed by running the same plan again.
"""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from itertools import product
from pathlib import Path

import numpy as np

from ._parallel import ordered_imap
from .ctpc import CtpcConfig, learn_structure_ctpc
from .ctss import CtssConfig, learn_structure_ctss
from .evaluation import compare_graphs, delta_bic_percent
from .generator import GenConfig, generate_model, sample_dataset
from .scoring import model_bic
from .stats import Hyperparams

__all__ = [
    "ALGORITHMS", "RESULT_COLUMNS", "SUMMARY_COLUMNS", "ExperimentPlan",
    "load_plan", "replicate_seed", "run_replicate", "run_benchmark", "summarize", "format_tables",
]

log = logging.getLogger(__name__)

ALGORITHMS = ("ctss", "ctpc-chi2", "ctpc-ks")
KEY_COLUMNS = ["n", "density", "cardinality", "h", "replicate", "algorithm"]
RESULT_COLUMNS = KEY_COLUMNS + ["tp", "fp", "fn", "precision", "recall", "f1", "bic", "wall_seconds"]
METRICS = ["f1", "precision", "recall", "bic", "delta_bic_percent", "wall_seconds"]
SUMMARY_COLUMNS = (["n", "density", "cardinality", "h", "algorithm", "replicates", "complete"]
                   + [f"{m}_{s}" for m in METRICS for s in ("mean", "sd")])


@dataclass(frozen=True)
class ExperimentPlan:
    nodes: tuple[int, ...] = (5, 10)
    densities: tuple[float, ...] = (0.1, 0.2)
    cardinalities: tuple[int, ...] = (2, 3)
    trajectories: tuple[int, ...] = (100,)
    replicates: int = 3
    algorithms: tuple[str, ...] = ALGORITHMS
    seed: int = 0
    duration: float = 100.0
    q_min: float = 1.0
    q_max: float = 10.0
    clamp_density: bool = True
    max_parents: int = 4
    ctss_mode: str = "exhaustive"
    alpha: float = 1.0
    tau: float = 1.0
    alpha_q: float = 0.1
    alpha_theta: float = 0.1
    max_sepset: int | None = None

    def __post_init__(self):
        for name in ("nodes", "densities", "cardinalities", "trajectories", "algorithms"):
            val = tuple(getattr(self, name))
            if not val:
                raise ValueError(f"plan factor {name!r} is empty")
            object.__setattr__(self, name, val)
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad:
            raise ValueError(f"unknown algorithms {sorted(bad)}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentPlan":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown plan keys {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def cells(self):
        """``(cell_index, n, density, cardinality, h)`` over the factorial grid."""
        grid = product(self.nodes, self.densities, self.cardinalities, self.trajectories)
        return [(i, *c) for i, c in enumerate(grid)]

    def ctss_config(self) -> CtssConfig:
        return CtssConfig(self.max_parents, self.ctss_mode, Hyperparams(self.alpha, self.tau))

    def ctpc_config(self, theta_test: str) -> CtpcConfig:
        return CtpcConfig(self.alpha_q, self.alpha_theta, theta_test, self.max_sepset)


def load_plan(source) -> ExperimentPlan:
    """Plan from a JSON file path, or one of the bundled plans by name
    (``"default"``, ``"acceptance"``)."""
    src = str(source)
    if not src.endswith(".json") and not Path(src).exists():
        text = resources.files("ctbnlearn").joinpath("plans", f"{src}.json").read_text()
    else:
        text = Path(src).read_text()
    return ExperimentPlan.from_dict(json.loads(text))


def replicate_seed(master: int, cell: int, replicate: int) -> int:
    return int(np.random.SeedSequence([master, cell, replicate]).generate_state(1)[0])


def _learn(plan: ExperimentPlan, algorithm: str, dataset):
    t0 = time.perf_counter()
    if algorithm == "ctss":
        graph = learn_structure_ctss(dataset, plan.ctss_config()).graph
    else:
        graph = learn_structure_ctpc(dataset, plan.ctpc_config(algorithm.split("-")[1]), record=False).graph
    return graph, time.perf_counter() - t0


def run_replicate(plan: ExperimentPlan, task) -> list[dict]:
    """Generate one network and dataset, learn it with every algorithm.

    ``task`` is ``(cell_index, n, density, cardinality, h, replicate)``.
    Algorithms that raise are logged and left out of the returned rows.
    """
    cell, n, density, card, h, rep = task
    cfg = GenConfig(n=n, density=density, cardinality=card, q_min=plan.q_min, q_max=plan.q_max,
                    n_trajectories=h, duration=plan.duration,
                    seed=replicate_seed(plan.seed, cell, rep), clamp_density=plan.clamp_density)
    model = generate_model(cfg)
    data = sample_dataset(model, cfg)
    rows = []
    for alg in plan.algorithms:
        try:
            graph, secs = _learn(plan, alg, data)
            rep_ = compare_graphs(graph, model.graph)
            bic = model_bic(graph, data)
        except Exception:
            log.exception("cell %d replicate %d: %s failed", cell, rep, alg)
            continue
        rows.append({
            "n": n, "density": density, "cardinality": card, "h": h, "replicate": rep,
            "algorithm": alg, "tp": rep_.tp, "fp": rep_.fp, "fn": rep_.fn,
            "precision": rep_.precision, "recall": rep_.recall, "f1": rep_.f1,
            "bic": bic, "wall_seconds": secs,
        })
    return rows


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _key(row) -> tuple:
    return (int(row["n"]), float(row["density"]), int(row["cardinality"]), int(row["h"]),
            int(row["replicate"]), str(row["algorithm"]))


def read_results(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_benchmark(plan: ExperimentPlan, out_dir, jobs: int = 1) -> list[dict]:
    """Run every missing ``(cell, replicate)`` of ``plan`` and rewrite the
    summaries. Returns the summary rows."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "plan.json").write_text(json.dumps(plan.to_dict(), indent=1) + "\n")
    results = out / "results.csv"
    done = {_key(r) for r in read_results(results)}
    tasks = []
    for cell, n, d, c, h in plan.cells():
        for rep in range(plan.replicates):
            keys = [(n, float(d), c, h, rep, a) for a in plan.algorithms]
            if not all(k in done for k in keys):
                tasks.append((cell, n, d, c, h, rep))
    fresh = not results.exists()
    with open(results, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if fresh:
            w.writerow(RESULT_COLUMNS)
        for rows in ordered_imap(run_replicate, plan, tasks, jobs):
            for row in rows:
                if _key(row) not in done:
                    w.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])
            fh.flush()
    summary = summarize(read_results(results), plan)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in summary:
            w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    (out / "tables.md").write_text(format_tables(summary))
    return summary


def _mean_sd(vals):
    if not vals:
        return float("nan"), float("nan")
    a = np.asarray(vals, dtype=float)
    return float(a.mean()), float(a.std(ddof=1)) if len(a) > 1 else 0.0


def summarize(rows: list[dict], plan: ExperimentPlan | None = None) -> list[dict]:
    """Mean and standard deviation per ``(n, density, cardinality, h, algorithm)``.

    ``delta_bic_percent`` compares each constraint-based run against the
    score-based run on the same replicate. A cell is complete when it has a
    row for every planned replicate.
    """
    rows = sorted(rows, key=_key)
    by_rep = {_key(r): r for r in rows}
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        k = _key(r)
        groups.setdefault(k[:4] + (k[5],), []).append(r)
    out = []
    for gk in sorted(groups, key=lambda g: (g[:4], ALGORITHMS.index(g[4]) if g[4] in ALGORITHMS else 99)):
        n, d, c, h, alg = gk
        rs = groups[gk]
        entry = {"n": n, "density": d, "cardinality": c, "h": h, "algorithm": alg,
                 "replicates": len(rs),
                 "complete": plan is None or len(rs) >= plan.replicates}
        deltas = []
        if alg != "ctss":
            for r in rs:
                ref = by_rep.get((n, d, c, h, int(r["replicate"]), "ctss"))
                if ref is not None:
                    deltas.append(delta_bic_percent(float(ref["bic"]), float(r["bic"])))
        for m in METRICS:
            vals = deltas if m == "delta_bic_percent" else [float(r[m]) for r in rs]
            entry[f"{m}_mean"], entry[f"{m}_sd"] = _mean_sd(vals)
        out.append(entry)
    return out


def format_tables(summary: list[dict], metric: str = "f1") -> str:
    """Markdown tables of ``mean (±sd)``: one block per algorithm and
    trajectory count, rows by node count, columns by density, grouped by
    cardinality."""
    lines = []
    algs = sorted({s["algorithm"] for s in summary}, key=lambda a: ALGORITHMS.index(a))
    for alg in algs:
        for h in sorted({s["h"] for s in summary}):
            sub = [s for s in summary if s["algorithm"] == alg and s["h"] == h]
            if not sub:
                continue
            dens = sorted({s["density"] for s in sub})
            lines.append(f"### {metric} for {alg}, h = {h}\n")
            lines.append("| cardinality | n | " + " | ".join(str(d) for d in dens) + " |")
            lines.append("|---|---|" + "---|" * len(dens))
            for c in sorted({s["cardinality"] for s in sub}):
                for n in sorted({s["n"] for s in sub}):
                    cells = []
                    for d in dens:
                        hit = [s for s in sub if (s["cardinality"], s["n"], s["density"]) == (c, n, d)]
                        cells.append(f"{hit[0][metric + '_mean']:.3f} (±{hit[0][metric + '_sd']:.3f})" if hit else "-")
                    lines.append(f"| {c} | {n} | " + " | ".join(cells) + " |")
            lines.append("")
    return "\n".join(lines)
