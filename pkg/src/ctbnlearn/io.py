"""JSON and CSV formats for models, datasets and learned graphs.

Floats are written with ``repr`` precision, so every float64 survives a
write/read cycle unchanged.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset, Trajectory
from .model import Cim, CtbnModel, DirectedGraph, VariableSpec

__all__ = [
    "model_to_dict", "model_from_dict", "write_model", "read_model",
    "dataset_to_dict", "dataset_from_dict", "write_dataset", "read_dataset",
    "write_dataset_csv", "read_dataset_csv",
    "graph_to_dict", "graph_from_dict", "write_graph", "read_graph",
]


def _variables(items) -> list[VariableSpec]:
    return [VariableSpec(v["name"], int(v["cardinality"])) for v in items]


def _var_dicts(variables) -> list[dict]:
    return [{"name": v.name, "cardinality": v.cardinality} for v in variables]


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def model_to_dict(model: CtbnModel) -> dict:
    names = model.names
    return {
        "variables": _var_dicts(model.variables),
        "arcs": [[names[a], names[b]] for a, b in model.graph.arcs],
        "cims": [
            {"node": names[k], "parents": [names[p] for p in cim.parents],
             "matrices": cim.matrices.tolist()}
            for k, cim in enumerate(model.cims)
        ],
        "initial": [w.tolist() for w in model.initial],
    }


def model_from_dict(d: dict) -> CtbnModel:
    variables = _variables(d["variables"])
    index = {v.name: i for i, v in enumerate(variables)}
    graph = DirectedGraph(len(variables), tuple((index[a], index[b]) for a, b in d["arcs"]))
    by_node = {c["node"]: c for c in d["cims"]}
    cims = []
    for k, v in enumerate(variables):
        c = by_node[v.name]
        parents = tuple(index[p] for p in c["parents"])
        if list(parents) != sorted(parents):
            raise ValueError(f"parents of {v.name} must be listed in ascending index order")
        cards = tuple(variables[p].cardinality for p in parents)
        cims.append(Cim(k, parents, cards, np.array(c["matrices"], dtype=float).reshape(-1, v.cardinality, v.cardinality)))
    return CtbnModel(variables, graph, cims, d.get("initial"))


def write_model(model: CtbnModel, path) -> None:
    _dump(model_to_dict(model), path)


def read_model(path) -> CtbnModel:
    return model_from_dict(json.loads(Path(path).read_text()))


def dataset_to_dict(dataset: Dataset) -> dict:
    trajs = []
    for tr in dataset.trajectories:
        entry = {
            "initial": tr.initial.tolist(),
            "events": [[t, v, s] for t, v, s in zip(tr.times.tolist(), tr.variables.tolist(), tr.states.tolist())],
            "duration": tr.duration,
        }
        if tr.absorbed:
            entry["absorbed"] = True
        trajs.append(entry)
    return {"variables": _var_dicts(dataset.variables), "trajectories": trajs}


def dataset_from_dict(d: dict) -> Dataset:
    trajs = []
    for t in d["trajectories"]:
        ev = t["events"]
        trajs.append(Trajectory(
            t["initial"],
            [e[0] for e in ev], [e[1] for e in ev], [e[2] for e in ev],
            t["duration"], bool(t.get("absorbed", False)),
        ))
    return Dataset(_variables(d["variables"]), trajs)


def write_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(json.dumps(dataset_to_dict(dataset)) + "\n")


def read_dataset(path) -> Dataset:
    return dataset_from_dict(json.loads(Path(path).read_text()))


def write_dataset_csv(dataset: Dataset, path) -> None:
    """Long CSV: ``trajectory_id, time, <variables...>``; each row is the full
    joint state after an event, starting with the initial state at time 0."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trajectory_id", "time", *dataset.names])
        for j, tr in enumerate(dataset.trajectories):
            path_states = tr.path()
            times = [0.0, *tr.times.tolist()]
            for t, row in zip(times, path_states.tolist()):
                w.writerow([j, repr(t), *row])


def read_dataset_csv(path, variables: Sequence[VariableSpec] | None = None,
                     durations: Sequence[float] | None = None) -> Dataset:
    """Inverse of :func:`write_dataset_csv`.

    The CSV carries no trajectory lengths; unless ``durations`` is given each
    trajectory ends at its last event. Cardinalities default to one more than
    the largest state seen.
    """
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        names = header[2:]
        rows: dict[int, list] = {}
        for rec in r:
            rows.setdefault(int(rec[0]), []).append((float(rec[1]), [int(v) for v in rec[2:]]))
    if variables is None:
        top = [1] * len(names)
        for recs in rows.values():
            for _, st in recs:
                top = [max(a, b) for a, b in zip(top, st)]
        variables = [VariableSpec(nm, c + 1) for nm, c in zip(names, top)]
    trajs = []
    for i, j in enumerate(sorted(rows)):
        recs = rows[j]
        states = np.array([s for _, s in recs])
        times = np.array([t for t, _ in recs])
        diff = states[1:] != states[:-1]
        if np.any(diff.sum(axis=1) != 1):
            raise ValueError(f"trajectory {j}: each row must change exactly one variable")
        var = diff.argmax(axis=1)
        new = states[1:][np.arange(len(var)), var]
        dur = durations[i] if durations is not None else float(times[-1])
        trajs.append(Trajectory(states[0], times[1:], var, new, dur))
    return Dataset(variables, trajs)


def graph_to_dict(graph: DirectedGraph, names: Sequence[str], **extra) -> dict:
    d = {"variables": list(names), "arcs": [[names[a], names[b]] for a, b in graph.arcs]}
    d.update(extra)
    return d


def graph_from_dict(d: dict) -> tuple[DirectedGraph, list[str]]:
    """Read a graph from a graph or model document."""
    names = [v["name"] if isinstance(v, dict) else v for v in d["variables"]]
    index = {nm: i for i, nm in enumerate(names)}
    return DirectedGraph(len(names), tuple((index[a], index[b]) for a, b in d["arcs"])), names


def write_graph(graph: DirectedGraph, names, path, **extra) -> None:
    _dump(graph_to_dict(graph, names, **extra), path)


def read_graph(path) -> tuple[DirectedGraph, list[str]]:
    return graph_from_dict(json.loads(Path(path).read_text()))
