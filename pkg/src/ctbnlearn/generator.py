"""Random CTBNs and exact trajectory sampling.

Random numbers come from independent streams derived from a single master
seed, so graph, parameters and each trajectory can be regenerated on their own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np

from .data import Dataset, Trajectory
from .model import Cim, CtbnModel, DirectedGraph, VariableSpec, n_configs

__all__ = [
    "GenConfig",
    "target_arc_count",
    "generate_graph",
    "generate_cims",
    "generate_model",
    "sample_trajectory",
    "sample_dataset",
]

_GRAPH_STREAM, _CIM_STREAM, _TRAJ_STREAM = 0, 1, 2


@dataclass(frozen=True)
class GenConfig:
    """Settings for synthetic CTBNs and datasets.

    ``density`` is the share of the ``n * (n - 1)`` possible arcs that are
    present. With ``clamp_density`` an infeasible target is raised to the
    ``n - 1`` arcs a connected graph needs instead of being rejected.
    """

    n: int
    density: float
    cardinality: int | tuple[int, ...] = 2
    q_min: float = 1.0
    q_max: float = 10.0
    n_trajectories: int = 300
    duration: float = 100.0
    seed: int = 0
    clamp_density: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one node")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if not 0 < self.q_min <= self.q_max:
            raise ValueError("rate range must satisfy 0 < q_min <= q_max")
        if self.n_trajectories < 0:
            raise ValueError("negative trajectory count")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if len(self.cardinalities) != self.n or min(self.cardinalities) < 2:
            raise ValueError("one cardinality >= 2 per node required")

    @property
    def cardinalities(self) -> tuple[int, ...]:
        if isinstance(self.cardinality, (int, np.integer)):
            return (int(self.cardinality),) * self.n
        return tuple(int(c) for c in self.cardinality)


def _rng(seed, *stream) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    if isinstance(seed, (int, np.integer)):
        seed = [int(seed)]
    return np.random.default_rng([*seed, *stream])


def target_arc_count(n: int, density: float) -> int:
    """``round(density * n * (n - 1))`` with halves rounded up."""
    return int(math.floor(density * n * (n - 1) + 0.5))


def generate_graph(config: GenConfig) -> DirectedGraph:
    """Random weakly connected digraph with the configured arc count.

    A uniformly random spanning tree with random arc orientations is drawn
    first, then further arcs are added uniformly at random.
    """
    n = config.n
    k = target_arc_count(n, config.density)
    if k < n - 1:
        if not config.clamp_density:
            raise ValueError(
                f"density {config.density} gives {k} arcs but a connected graph on {n} nodes "
                f"needs at least n-1 = {n - 1}"
            )
        k = n - 1
    rng = _rng(config.seed, _GRAPH_STREAM)
    if n == 1:
        return DirectedGraph(1)
    if n == 2:
        edges = [(0, 1)]
    else:
        prufer = rng.integers(0, n, size=n - 2).tolist()
        edges = sorted(tuple(sorted(e)) for e in nx.from_prufer_sequence(prufer).edges())
    flips = rng.random(len(edges)) < 0.5
    arcs = {(b, a) if f else (a, b) for (a, b), f in zip(edges, flips)}
    rest = [(a, b) for a in range(n) for b in range(n) if a != b and (a, b) not in arcs]
    extra = rng.choice(len(rest), size=k - len(arcs), replace=False)
    arcs.update(rest[i] for i in extra)
    return DirectedGraph(n, tuple(arcs))


def generate_cims(graph: DirectedGraph, config: GenConfig) -> CtbnModel:
    """Draw one CIM per node: rates uniform on ``[q_min, q_max]``, destination
    distributions from a flat Dirichlet."""
    cards = config.cardinalities
    rng = _rng(config.seed, _CIM_STREAM)
    cims = []
    for k in range(graph.n):
        pa = graph.parents(k)
        pcards = tuple(cards[p] for p in pa)
        m = cards[k]
        mats = np.zeros((n_configs(pcards), m, m))
        for u in range(mats.shape[0]):
            for x in range(m):
                q = rng.uniform(config.q_min, config.q_max)
                theta = rng.dirichlet(np.ones(m - 1)) if m > 2 else np.ones(1)
                dest = [y for y in range(m) if y != x]
                mats[u, x, dest] = q * theta
                mats[u, x, x] = -q
        cims.append(Cim(k, pa, pcards, mats))
    variables = [VariableSpec(f"X{k}", cards[k]) for k in range(graph.n)]
    return CtbnModel(variables, graph, cims)


def generate_model(config: GenConfig) -> CtbnModel:
    return generate_cims(generate_graph(config), config)


class _Tables:
    """Per-node lookup tables used by the sampler."""

    def __init__(self, model: CtbnModel):
        n = model.n
        self.n = n
        self.rates = []
        self.dests = []
        self.parents = []
        self.children = [[] for _ in range(n)]
        for k, cim in enumerate(model.cims):
            strides, s = [], 1
            for c in cim.parent_cards:
                strides.append(s)
                s *= c
            self.parents.append(list(zip(cim.parents, strides)))
            for p, w in zip(cim.parents, strides):
                self.children[p].append((k, w))
            q = -np.diagonal(cim.matrices, axis1=1, axis2=2)
            self.rates.append(q.tolist())
            m = cim.cardinality
            rows = []
            for u in range(cim.n_configs):
                per_x = []
                for x in range(m):
                    dest = [y for y in range(m) if y != x]
                    if q[u, x] > 0:
                        p = cim.matrices[u, x, dest] / q[u, x]
                        per_x.append((dest, np.cumsum(p).tolist()))
                    else:
                        per_x.append((dest, None))
                rows.append(per_x)
            self.dests.append(rows)


def _pick(dest, cum, u01):
    total = cum[-1]
    target = u01 * total
    for y, c in zip(dest, cum):
        if target < c:
            return y
    return dest[-1]


def sample_trajectory(model: CtbnModel, duration: float, seed=None, *, _tables=None) -> Trajectory:
    """Exact sample path of ``model`` on ``[0, duration]``.

    Every variable holds an exponential clock with the rate of its current
    state under its current parent configuration. The earliest clock fires,
    its variable jumps to a destination drawn from the transition
    distribution, and all clocks are redrawn. If every rate is zero the path
    stops at the last event and is flagged ``absorbed``.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    rng = _rng(seed)
    tab = _tables or _Tables(model)
    n = tab.n
    state = [int(rng.choice(len(w), p=w)) for w in model.initial]
    initial = list(state)
    code = [sum(state[p] * w for p, w in tab.parents[k]) for k in range(n)]
    rate = [tab.rates[k][code[k]][state[k]] for k in range(n)]

    times, variables, states = [], [], []
    block = 512
    t = 0.0
    absorbed = False
    clocks: list = []
    coins: list = []
    i = block
    while True:
        if i == block:
            clocks = rng.standard_exponential((block, n)).tolist()
            coins = rng.random(block).tolist()
            i = 0
        draw = clocks[i]
        coin = coins[i]
        i += 1
        wait = math.inf
        k = -1
        for j in range(n):
            r = rate[j]
            if r > 0.0:
                w = draw[j] / r
                if w < wait:
                    wait = w
                    k = j
        if k < 0:
            absorbed = True
            duration = t
            break
        t += wait
        if t > duration:
            break
        x = state[k]
        dest, cum = tab.dests[k][code[k]][x]
        y = dest[0] if len(dest) == 1 else _pick(dest, cum, coin)
        times.append(t)
        variables.append(k)
        states.append(y)
        state[k] = y
        rate[k] = tab.rates[k][code[k]][y]
        for c, w in tab.children[k]:
            code[c] += (y - x) * w
            rate[c] = tab.rates[c][code[c]][state[c]]
    return Trajectory(initial, times, variables, states, duration, absorbed)


def sample_dataset(model: CtbnModel, config: GenConfig) -> Dataset:
    """``config.n_trajectories`` paths, each of length ``config.duration``.

    Trajectory ``i`` uses its own stream derived from ``(config.seed, i)``.
    """
    tab = _Tables(model)
    trajs = [
        sample_trajectory(model, config.duration, _rng(config.seed, _TRAJ_STREAM, i), _tables=tab)
        for i in range(config.n_trajectories)
    ]
    return Dataset(model.variables, trajs)
