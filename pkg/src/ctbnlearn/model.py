"""Core CTBN representation: variables, cyclic digraphs, conditional intensity
matrices and the rate / transition-probability decomposition.

Parent configurations are encoded as a single mixed-radix integer in which the
lowest-index parent is the fastest-varying digit. The same encoding is used by
the sufficient statistics and by the on-disk formats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "VariableSpec",
    "DirectedGraph",
    "Cim",
    "QThetaParams",
    "CtbnModel",
    "Violation",
    "config_index",
    "config_states",
    "n_configs",
    "validate_intensity_matrix",
    "validate_model",
    "cim_to_params",
    "params_to_cim",
]


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def n_configs(cards: Sequence[int]) -> int:
    return int(np.prod(cards, dtype=np.int64)) if len(cards) else 1


def config_index(states: Sequence[int], cards: Sequence[int]) -> int:
    """Mixed-radix index of a configuration, first digit fastest."""
    idx, stride = 0, 1
    for s, c in zip(states, cards):
        if not 0 <= s < c:
            raise ValueError(f"state {s} out of range for cardinality {c}")
        idx += int(s) * stride
        stride *= int(c)
    return idx


def config_states(index: int, cards: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`config_index`."""
    out = []
    for c in cards:
        out.append(index % c)
        index //= c
    return tuple(out)


@dataclass(frozen=True)
class VariableSpec:
    name: str
    cardinality: int

    def __post_init__(self):
        if int(self.cardinality) < 2:
            raise ValueError(f"variable {self.name!r} needs at least 2 states")


@dataclass(frozen=True)
class DirectedGraph:
    """Directed graph on ``n`` nodes; cycles allowed, self-loops not."""

    n: int
    arcs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        arcs = [(int(a), int(b)) for a, b in self.arcs]
        if len(set(arcs)) != len(arcs):
            raise ValueError("duplicate arcs")
        for a, b in arcs:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"arc ({a}, {b}) out of range for {self.n} nodes")
        object.__setattr__(self, "arcs", tuple(sorted(arcs)))

    @classmethod
    def from_parent_sets(cls, parent_sets: Sequence[Sequence[int]]) -> "DirectedGraph":
        return cls(len(parent_sets), tuple((p, k) for k, ps in enumerate(parent_sets) for p in ps))

    def parents(self, node: int) -> tuple[int, ...]:
        return tuple(a for a, b in self.arcs if b == node)

    def children(self, node: int) -> tuple[int, ...]:
        return tuple(b for a, b in self.arcs if a == node)

    def adjacency(self) -> np.ndarray:
        """Boolean matrix with ``A[parent, child]`` set for every arc."""
        adj = np.zeros((self.n, self.n), dtype=bool)
        for a, b in self.arcs:
            adj[a, b] = True
        return adj

    def __len__(self):
        return len(self.arcs)


@dataclass(frozen=True)
class Cim:
    """Conditional intensity matrix of one node.

    ``matrices[u]`` is the intensity matrix of the target under the parent
    configuration with mixed-radix index ``u``.
    """

    target: int
    parents: tuple[int, ...]
    parent_cards: tuple[int, ...]
    matrices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(int(p) for p in self.parents))
        object.__setattr__(self, "parent_cards", tuple(int(c) for c in self.parent_cards))
        mats = _frozen(self.matrices)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("matrices must have shape (n_configs, m, m)")
        if len(self.parents) != len(self.parent_cards):
            raise ValueError("one cardinality per parent required")
        if mats.shape[0] != n_configs(self.parent_cards):
            raise ValueError(
                f"expected {n_configs(self.parent_cards)} intensity matrices, got {mats.shape[0]}"
            )
        object.__setattr__(self, "matrices", mats)

    @property
    def cardinality(self) -> int:
        return self.matrices.shape[1]

    @property
    def n_configs(self) -> int:
        return self.matrices.shape[0]

    def matrix(self, config: Sequence[int]) -> np.ndarray:
        """Intensity matrix for a parent configuration given as states."""
        return self.matrices[config_index(config, self.parent_cards)]


@dataclass(frozen=True)
class QThetaParams:
    """Exit rates ``q[u, x]`` and destination distributions ``theta[u, x, :]``.

    Rows with ``q == 0`` have no defined destination distribution; their
    ``theta`` entries are NaN and ``defined[u, x]`` is False.
    """

    target: int
    parents: tuple[int, ...]
    parent_cards: tuple[int, ...]
    q: np.ndarray
    theta: np.ndarray
    defined: np.ndarray = field(default=None)

    def __post_init__(self):
        q = _frozen(self.q)
        theta = _frozen(self.theta)
        if self.defined is None:
            defined = _frozen(q > 0, dtype=bool)
        else:
            defined = _frozen(self.defined, dtype=bool)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "defined", defined)
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "parent_cards", tuple(self.parent_cards))


@dataclass(frozen=True)
class CtbnModel:
    variables: tuple[VariableSpec, ...]
    graph: DirectedGraph
    cims: tuple[Cim, ...]
    initial: tuple[np.ndarray, ...] = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cims", tuple(self.cims))
        if self.initial is None:
            init = tuple(_frozen(np.full(v.cardinality, 1.0 / v.cardinality)) for v in self.variables)
        else:
            init = tuple(_frozen(w) for w in self.initial)
        object.__setattr__(self, "initial", init)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)


@dataclass(frozen=True)
class Violation:
    node: int | None
    config: tuple[int, ...] | None
    constraint: str

    def __str__(self):
        where = []
        if self.node is not None:
            where.append(f"node {self.node}")
        if self.config is not None:
            where.append(f"config {self.config}")
        return f"{', '.join(where) or 'model'}: {self.constraint}"


def validate_intensity_matrix(Q, node=None, config=None) -> list[Violation]:
    Q = np.asarray(Q, dtype=float)
    out = []
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        return [Violation(node, config, f"matrix is not square: shape {Q.shape}")]
    m = Q.shape[0]
    off = ~np.eye(m, dtype=bool)
    if np.any(Q[off] < 0):
        out.append(Violation(node, config, "negative off-diagonal entry"))
    diag = np.diag(Q)
    for x in np.flatnonzero(diag > 0):
        out.append(Violation(node, config, f"row {x} has positive diagonal {diag[x]!r}"))
    sums = Q.sum(axis=1)
    tol = 1e-9 * np.maximum(1.0, np.abs(diag))
    for x in np.flatnonzero(np.abs(sums) > tol):
        out.append(Violation(node, config, f"row {x} sums to {sums[x]!r} != 0"))
    return out


def validate_model(model: CtbnModel) -> list[Violation]:
    """Check every structural and numerical invariant of ``model``.

    Never raises; returns an empty list for a valid model.
    """
    out: list[Violation] = []
    names = [v.name for v in model.variables]
    if len(set(names)) != len(names):
        out.append(Violation(None, None, "variable names are not unique"))
    for k, v in enumerate(model.variables):
        if v.cardinality < 2:
            out.append(Violation(k, None, "cardinality below 2"))
    if model.graph.n != model.n:
        out.append(Violation(None, None, f"graph has {model.graph.n} nodes, model {model.n}"))
        return out
    if len(model.cims) != model.n:
        out.append(Violation(None, None, f"{len(model.cims)} CIMs for {model.n} nodes"))
        return out
    cards = model.cardinalities
    for k, cim in enumerate(model.cims):
        pa = model.graph.parents(k)
        if cim.target != k:
            out.append(Violation(k, None, f"CIM target is {cim.target}"))
        if cim.parents != pa:
            out.append(Violation(k, None, f"CIM parents {cim.parents} differ from graph parents {pa}"))
            continue
        expect = tuple(cards[p] for p in pa)
        if cim.parent_cards != expect:
            out.append(Violation(k, None, "parent cardinalities do not match variables"))
            continue
        if cim.cardinality != cards[k]:
            out.append(Violation(k, None, f"matrix side {cim.cardinality} != cardinality {cards[k]}"))
            continue
        for u in range(cim.n_configs):
            out.extend(validate_intensity_matrix(cim.matrices[u], k, config_states(u, expect)))
    for k, w in enumerate(model.initial):
        if k >= model.n:
            break
        if len(w) != cards[k] or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            out.append(Violation(k, None, "initial distribution is not a probability vector"))
    if len(model.initial) != model.n:
        out.append(Violation(None, None, "one initial distribution per variable required"))
    return out


def cim_to_params(cim: Cim) -> QThetaParams:
    mats = cim.matrices
    m = cim.cardinality
    q = -np.diagonal(mats, axis1=1, axis2=2).copy()
    defined = q > 0
    theta = np.full(mats.shape, np.nan)
    off = ~np.eye(m, dtype=bool)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = mats / q[:, :, None]
    theta[defined] = np.where(off, ratio, 0.0)[defined]
    return QThetaParams(cim.target, cim.parents, cim.parent_cards, q, theta, defined)


def params_to_cim(params: QThetaParams) -> Cim:
    q = np.asarray(params.q, dtype=float)
    theta = np.asarray(params.theta, dtype=float)
    n_cfg, m = q.shape
    if theta.shape != (n_cfg, m, m):
        raise ValueError(f"theta shape {theta.shape} does not match q shape {q.shape}")
    if np.any(q < 0):
        raise ValueError("negative exit rate")
    mats = np.zeros((n_cfg, m, m))
    for u in range(n_cfg):
        for x in range(m):
            if q[u, x] == 0:
                continue
            row = theta[u, x].copy()
            if not np.all(np.isfinite(row)):
                raise ValueError(f"undefined theta row for positive rate at config {u}, state {x}")
            if row[x] != 0:
                raise ValueError(f"theta row (config {u}, state {x}) puts mass on the current state")
            if np.any(row < 0) or abs(row.sum() - 1.0) > 1e-9:
                raise ValueError(f"theta row (config {u}, state {x}) does not sum to 1")
            mats[u, x] = q[u, x] * row
            mats[u, x, x] = -q[u, x]
    return Cim(params.target, params.parents, params.parent_cards, mats)
