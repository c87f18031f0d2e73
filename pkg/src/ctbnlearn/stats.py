"""Sufficient statistics, maximum-likelihood CIMs and conjugate posteriors."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset
from .model import Cim, QThetaParams, n_configs, params_to_cim

__all__ = [
    "SuffStats",
    "Hyperparams",
    "MleEstimate",
    "PosteriorParams",
    "compute_suffstats",
    "aggregate_check",
    "mle_cim",
    "posterior_params",
    "TargetStats",
]


@dataclass(frozen=True)
class SuffStats:
    """Time-in-state ``T[u, x]`` and transition counts ``M[u, x, x']`` of one
    node under every configuration ``u`` of a conditioning set.

    ``M`` is stored as a full ``m x m`` block per configuration; its diagonal is
    always zero.
    """

    target: int
    cardinality: int
    cond: tuple[int, ...]
    cond_cards: tuple[int, ...]
    T: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cond", tuple(int(c) for c in self.cond))
        object.__setattr__(self, "cond_cards", tuple(int(c) for c in self.cond_cards))
        shape = (n_configs(self.cond_cards), self.cardinality)
        if np.shape(self.T) != shape or np.shape(self.M) != shape + (self.cardinality,):
            raise ValueError("T/M shapes do not match the conditioning set")

    @property
    def n_configs(self) -> int:
        return self.T.shape[0]

    @property
    def M_row(self) -> np.ndarray:
        """Number of exits from each ``(u, x)`` cell."""
        return self.M.sum(axis=2)

    def per_variable(self):
        """``T`` and ``M`` with one axis per conditioning variable."""
        m = self.cardinality
        T = self.T.reshape(self.cond_cards + (m,), order="F")
        M = self.M.reshape(self.cond_cards + (m, m), order="F")
        return T, M

    def marginalize(self, var: int) -> "SuffStats":
        """Sum out conditioning variable ``var``."""
        pos = self.cond.index(var)
        T, M = self.per_variable()
        T = T.sum(axis=pos)
        M = M.sum(axis=pos)
        cond = self.cond[:pos] + self.cond[pos + 1:]
        cards = self.cond_cards[:pos] + self.cond_cards[pos + 1:]
        k = n_configs(cards)
        m = self.cardinality
        return SuffStats(self.target, m, cond, cards,
                         T.reshape((k, m), order="F"), M.reshape((k, m, m), order="F"))

    def __add__(self, other: "SuffStats") -> "SuffStats":
        if (self.target, self.cond, self.cond_cards) != (other.target, other.cond, other.cond_cards):
            raise ValueError("cannot merge statistics of different node/conditioning sets")
        return SuffStats(self.target, self.cardinality, self.cond, self.cond_cards,
                         self.T + other.T, self.M + other.M)

    def to_json(self) -> str:
        return json.dumps({
            "target": self.target,
            "cardinality": self.cardinality,
            "cond": list(self.cond),
            "cond_cards": list(self.cond_cards),
            "T": self.T.tolist(),
            "M": self.M.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "SuffStats":
        d = json.loads(text)
        return cls(d["target"], d["cardinality"], tuple(d["cond"]), tuple(d["cond_cards"]),
                   np.array(d["T"], dtype=float), np.array(d["M"], dtype=np.int64))


def compute_suffstats(dataset: Dataset, target: int, cond: Sequence[int] = ()) -> SuffStats:
    """Accumulate ``T`` and ``M`` for ``target`` given the variables in ``cond``.

    Time between consecutive events goes to the cell active during that
    interval; the censored segment before the end of a trajectory contributes
    time only. A jump is counted under the configuration in force just before it.
    """
    cond = tuple(sorted(int(c) for c in cond))
    if target in cond:
        raise ValueError("target cannot be in its own conditioning set")
    if len(set(cond)) != len(cond):
        raise ValueError("duplicate conditioning variables")
    n = dataset.n
    if not 0 <= target < n or any(not 0 <= c < n for c in cond):
        raise ValueError("variable index out of range")
    cards = dataset.cardinalities
    m = cards[target]
    ccards = tuple(cards[c] for c in cond)
    k = n_configs(ccards)
    seg = dataset.segments
    if len(seg.dt) == 0:
        return SuffStats(target, m, cond, ccards, np.zeros((k, m)), np.zeros((k, m, m), dtype=np.int64))

    states = seg.states
    code = np.zeros(len(seg.dt), dtype=np.int64)
    stride = 1
    for c, card in zip(cond, ccards):
        code += states[:, c] * stride
        stride *= card
    cell = code * m + states[:, target]
    T = np.bincount(cell, weights=seg.dt, minlength=k * m).reshape(k, m)

    jumps = seg.event_var == target
    idx = cell[jumps] * m + seg.event_to[jumps]
    M = np.bincount(idx, minlength=k * m * m).reshape(k, m, m).astype(np.int64)
    return SuffStats(target, m, cond, ccards, T, M)


def aggregate_check(fine: SuffStats, coarse: SuffStats, rtol: float = 1e-9) -> bool:
    """True iff summing ``fine`` over its extra variable reproduces ``coarse``."""
    if fine.target != coarse.target or fine.cardinality != coarse.cardinality:
        raise ValueError("statistics describe different target variables")
    extra = set(fine.cond) - set(coarse.cond)
    if len(extra) != 1 or not set(coarse.cond) <= set(fine.cond):
        raise ValueError("fine conditioning set must extend coarse by exactly one variable")
    summed = fine.marginalize(extra.pop())
    if summed.cond_cards != coarse.cond_cards:
        raise ValueError("conditioning cardinalities disagree")
    scale = max(1.0, float(np.abs(coarse.T).sum()))
    return bool(np.all(np.abs(summed.T - coarse.T) <= rtol * scale)
                and np.array_equal(summed.M, coarse.M))


class TargetStats:
    """Statistics of one target under arbitrary conditioning sets.

    When the table over all other variables fits in ``max_cells`` entries it
    is computed once and every request is answered by summing out the unused
    variables; otherwise each request makes a pass over the data. Results are
    memoized per conditioning set.
    """

    def __init__(self, dataset: Dataset, target: int, max_cells: int = 1 << 22):
        self.dataset = dataset
        self.target = target
        cards = dataset.cardinalities
        self.others = tuple(j for j in range(dataset.n) if j != target)
        m = cards[target]
        size = n_configs([cards[j] for j in self.others]) * m * m
        self._joint = None
        if size <= max_cells:
            self._joint = compute_suffstats(dataset, target, self.others).per_variable()
        self._cache: dict[tuple, SuffStats] = {}

    def __call__(self, cond: Sequence[int]) -> SuffStats:
        key = tuple(sorted(cond))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self._joint is None:
            st = compute_suffstats(self.dataset, self.target, key)
        else:
            if self.target in key:
                raise ValueError("target cannot be in its own conditioning set")
            cards = self.dataset.cardinalities
            drop = tuple(i for i, j in enumerate(self.others) if j not in key)
            T, M = self._joint
            m = cards[self.target]
            ccards = tuple(cards[j] for j in key)
            k = n_configs(ccards)
            T = T.sum(axis=drop) if drop else T
            M = M.sum(axis=drop) if drop else M
            st = SuffStats(self.target, m, key, ccards,
                           np.reshape(T, (k, m), order="F"), np.reshape(M, (k, m, m), order="F"))
        self._cache[key] = st
        return st


@dataclass(frozen=True)
class MleEstimate:
    params: QThetaParams
    cim: Cim
    observed: np.ndarray  # T > 0
    theta_defined: np.ndarray  # at least one exit seen


def mle_cim(stats: SuffStats) -> MleEstimate:
    """Maximum-likelihood rates and destination distributions.

    Unobserved cells get rate 0; cells with no exits have NaN theta rows.
    """
    row = stats.M_row
    observed = stats.T > 0
    q = np.zeros_like(stats.T)
    np.divide(row, stats.T, out=q, where=observed)
    has_exit = row > 0
    theta = np.full(stats.M.shape, np.nan)
    theta[has_exit] = stats.M[has_exit] / row[has_exit][:, None]
    params = QThetaParams(stats.target, stats.cond, stats.cond_cards, q, theta, has_exit)
    return MleEstimate(params, params_to_cim(params), observed, has_exit)


@dataclass(frozen=True)
class Hyperparams:
    """Conjugate prior settings.

    ``alpha`` is the pseudo-count of exits from a state and ``tau`` the
    pseudo-time spent in it. With ``allocation="proportional"`` both are
    divided by the number of parent configurations; ``"flat"`` gives every
    configuration the full amount.
    """

    alpha: float = 1.0
    tau: float = 1.0
    allocation: str = "flat"

    def __post_init__(self):
        if not (self.alpha > 0 and self.tau > 0):
            raise ValueError("alpha and tau must be positive")
        if self.allocation not in ("flat", "proportional"):
            raise ValueError(f"unknown prior allocation {self.allocation!r}")

    def cell_priors(self, n_cfg: int, m: int):
        """Per-cell ``(alpha_x, tau_x, alpha_xx')``."""
        scale = n_cfg if self.allocation == "proportional" else 1
        a = self.alpha / scale
        return a, self.tau / scale, a / (m - 1)


@dataclass(frozen=True)
class PosteriorParams:
    gamma_shape: np.ndarray
    gamma_rate: np.ndarray
    dirichlet: np.ndarray  # diagonal entries are NaN


def posterior_params(stats: SuffStats, hp: Hyperparams) -> PosteriorParams:
    a, t, a_xy = hp.cell_priors(stats.n_configs, stats.cardinality)
    shape = a + stats.M_row
    rate = t + stats.T
    m = stats.cardinality
    dirichlet = a_xy + stats.M.astype(float)
    dirichlet[:, np.arange(m), np.arange(m)] = np.nan
    return PosteriorParams(shape, rate, dirichlet)
