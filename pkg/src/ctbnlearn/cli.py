"""``ctbnlearn`` command line: generate, learn, evaluate, benchmark.

Exit status is 0 on success, 1 when a run fails and 2 for invalid input
(bad arguments, unreadable or malformed files, infeasible settings).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

from .benchmark import load_plan, run_benchmark
from .ctpc import CtpcConfig, learn_structure_ctpc, verdicts_to_dict
from .ctss import CtssConfig, learn_structure_ctss
from .evaluation import evaluate
from .generator import GenConfig, generate_model, sample_dataset
from .io import (read_dataset, read_dataset_csv, read_graph, write_dataset,
                 write_dataset_csv, write_graph, write_model)
from .stats import Hyperparams

log = logging.getLogger("ctbnlearn")


class InputError(Exception):
    """Raised for problems with user-supplied files or settings (exit 2)."""


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _gen_config(path) -> GenConfig:
    d = _load_json(path)
    known = {f.name for f in fields(GenConfig)}
    extra = set(d) - known
    if extra:
        raise InputError(f"unknown config keys {sorted(extra)}")
    if isinstance(d.get("cardinality"), list):
        d["cardinality"] = tuple(d["cardinality"])
    try:
        return GenConfig(**d)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid config: {exc}") from exc


def _read_data(path):
    try:
        if str(path).endswith(".csv"):
            return read_dataset_csv(path)
        return read_dataset(path)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read dataset {path}: {exc}") from exc


def cmd_generate(args) -> int:
    cfg = _gen_config(args.config)
    try:
        model = generate_model(cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    data = sample_dataset(model, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_model(model, out / "model.json")
    write_dataset(data, out / "dataset.json")
    write_dataset_csv(data, out / "dataset.csv")
    print(f"n={model.n} arcs={len(model.graph.arcs)} psi={data.n_transitions}")
    return 0


def cmd_learn(args) -> int:
    data = _read_data(args.dataset)
    t0 = time.perf_counter()
    try:
        if args.algorithm == "ctss":
            cfg = CtssConfig(args.max_parents, args.search, Hyperparams(args.alpha, args.tau))
            result = learn_structure_ctss(data, cfg, jobs=args.jobs)
            extra = {"algorithm": "ctss", "config": {"max_parents": cfg.max_parents, "search": cfg.mode,
                                                     "alpha": args.alpha, "tau": args.tau}}
        else:
            cfg = CtpcConfig(args.alpha_q, args.alpha_theta, args.theta_test, args.max_sepset)
            result = learn_structure_ctpc(data, cfg, jobs=args.jobs, record=args.verdicts is not None)
            extra = {"algorithm": "ctpc", "config": {"alpha_q": cfg.alpha_q, "alpha_theta": cfg.alpha_theta,
                                                     "theta_test": cfg.theta_test, "max_sepset": cfg.max_sepset}}
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    secs = time.perf_counter() - t0
    extra["seed"] = args.seed
    write_graph(result.graph, data.names, args.out, **extra)
    if args.algorithm == "ctpc" and args.verdicts is not None:
        Path(args.verdicts).write_text(json.dumps(verdicts_to_dict(result, data.names), indent=1) + "\n")
    print(f"{len(result.graph.arcs)} arcs learned in {secs:.3f}s -> {args.out}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    try:
        learned, ln = read_graph(args.learned)
        truth, tn = read_graph(args.truth)
        ref = None
        if args.reference:
            ref, rn = read_graph(args.reference)
            if rn != tn:
                raise InputError("reference and truth have different variables")
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read graph: {exc}") from exc
    if ln != tn:
        raise InputError(f"node sets differ: {ln} vs {tn}")
    data = _read_data(args.dataset) if args.dataset else None
    if data is not None and data.names != tn:
        raise InputError("dataset variables differ from the graphs")
    rep = evaluate(learned, truth, data, ref)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(rep.csv_header())
    w.writerow(rep.csv_row())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(rep.to_json() + "\n")
        with open(out / "report.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(rep.csv_header())
            w.writerow(rep.csv_row())
    return 0


def cmd_benchmark(args) -> int:
    try:
        plan = load_plan(args.plan)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"invalid plan: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "errors.log")
    handler.setLevel(logging.WARNING)
    logging.getLogger("ctbnlearn").addHandler(handler)
    try:
        summary = run_benchmark(plan, out, jobs=args.jobs)
    finally:
        logging.getLogger("ctbnlearn").removeHandler(handler)
        handler.close()
    incomplete = [s for s in summary if not s["complete"]]
    print(f"{len(summary)} summary rows, {len(incomplete)} incomplete -> {out}")
    return 1 if incomplete else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctbnlearn", description="Structure learning for continuous-time Bayesian networks.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a random network and dataset from a JSON config")
    g.add_argument("config")
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_generate)

    lp = sub.add_parser("learn", help="learn a graph from a dataset (JSON or CSV)")
    lp.add_argument("dataset")
    lp.add_argument("--algorithm", choices=["ctss", "ctpc"], default="ctpc")
    lp.add_argument("--theta-test", choices=["chi2", "ks"], default="chi2")
    lp.add_argument("--alpha-q", type=float, default=0.1)
    lp.add_argument("--alpha-theta", type=float, default=0.1)
    lp.add_argument("--max-parents", type=int, default=4)
    lp.add_argument("--max-sepset", type=int, default=None)
    lp.add_argument("--search", choices=["exhaustive", "hill_climb"], default="exhaustive")
    lp.add_argument("--alpha", type=float, default=1.0, help="score prior pseudo-count")
    lp.add_argument("--tau", type=float, default=1.0, help="score prior pseudo-time")
    lp.add_argument("--jobs", type=int, default=1)
    lp.add_argument("--seed", type=int, default=0, help="recorded in the output; both learners are deterministic")
    lp.add_argument("--out", default="graph.json")
    lp.add_argument("--verdicts", default=None, help="write the independence-test log here (ctpc)")
    lp.set_defaults(func=cmd_learn)

    e = sub.add_parser("evaluate", help="compare a learned graph with the true one")
    e.add_argument("learned")
    e.add_argument("truth", help="graph or model JSON")
    e.add_argument("dataset", nargs="?", default=None)
    e.add_argument("--reference", default=None, help="graph whose BIC is the baseline (default: truth)")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("benchmark", help="run a factorial experiment plan")
    b.add_argument("plan", nargs="?", default="default", help="plan JSON, or a bundled plan name")
    b.add_argument("--out", default="benchmark-out")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
