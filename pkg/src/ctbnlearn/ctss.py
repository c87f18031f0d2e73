"""Score-based structure learning: each node's parent set maximizes its
Bayesian score independently of the others."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from ._parallel import ordered_map
from .data import Dataset
from .model import DirectedGraph
from .scoring import NodeScore, score_stats
from .stats import Hyperparams, TargetStats

__all__ = ["CtssConfig", "CtssResult", "learn_parents_ctss", "learn_structure_ctss"]


@dataclass(frozen=True)
class CtssConfig:
    max_parents: int = 4
    mode: str = "exhaustive"
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    parent_penalty: float = 0.0

    def __post_init__(self):
        if self.mode not in ("exhaustive", "hill_climb"):
            raise ValueError(f"unknown search mode {self.mode!r}")
        if self.max_parents < 0:
            raise ValueError("max_parents must be non-negative")


@dataclass(frozen=True)
class CtssResult:
    graph: DirectedGraph
    scores: tuple[NodeScore, ...]


def _better(score: float, parents: tuple, best_score: float, best: tuple) -> bool:
    # ties go to the smaller set, then the lexicographically smaller one
    if score != best_score:
        return score > best_score
    return (len(parents), parents) < (len(best), best)


class _Scorer:
    def __init__(self, dataset, node, config):
        self.stats = TargetStats(dataset, node)
        self.config = config
        self.cache: dict[tuple, NodeScore] = {}

    def __call__(self, parents: tuple) -> NodeScore:
        if parents not in self.cache:
            st = self.stats(parents)
            self.cache[parents] = score_stats(st, self.config.hyperparams, self.config.parent_penalty)
        return self.cache[parents]


def learn_parents_ctss(dataset: Dataset, node: int, config: CtssConfig = CtssConfig()):
    """Best-scoring parent set of ``node``.

    Returns ``(parents, NodeScore)``. Exhaustive mode scores every subset of
    size up to ``max_parents``; hill-climb mode starts from the empty set and
    applies the best strictly improving single-arc addition or deletion.
    """
    others = [j for j in range(dataset.n) if j != node]
    limit = min(config.max_parents, len(others))
    score = _Scorer(dataset, node, config)

    if config.mode == "exhaustive":
        best = ()
        best_score = score(best)
        for size in range(1, limit + 1):
            for cand in combinations(others, size):
                s = score(cand)
                if _better(s.total, cand, best_score.total, best):
                    best, best_score = cand, s
        return best, best_score

    current = ()
    current_score = score(current)
    while True:
        moves = []
        if len(current) < limit:
            moves += [tuple(sorted(current + (j,))) for j in others if j not in current]
        moves += [tuple(p for p in current if p != j) for j in current]
        best, best_score = current, current_score
        for cand in moves:
            s = score(cand)
            if s.total > current_score.total and _better(s.total, cand, best_score.total, best):
                best, best_score = cand, s
        if best == current:
            return current, current_score
        current, current_score = best, best_score


def _node_task(payload, node):
    dataset, config = payload
    return learn_parents_ctss(dataset, node, config)


def learn_structure_ctss(dataset: Dataset, config: CtssConfig = CtssConfig(), jobs: int = 1) -> CtssResult:
    results = ordered_map(_node_task, (dataset, config), range(dataset.n), jobs)
    graph = DirectedGraph.from_parent_sets([p for p, _ in results])
    return CtssResult(graph, tuple(s for _, s in results))
