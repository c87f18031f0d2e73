"""Closed-form Bayesian scores, likelihoods and BIC for CTBN structures."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from .data import Dataset
from .model import CtbnModel, DirectedGraph, n_configs
from .stats import Hyperparams, SuffStats, compute_suffstats

__all__ = [
    "NodeScore",
    "log_ml_q",
    "log_ml_theta",
    "score_stats",
    "node_score",
    "graph_score",
    "log_likelihood",
    "mle_log_likelihood",
    "n_free_parameters",
    "model_bic",
]


@dataclass(frozen=True)
class NodeScore:
    node: int
    parents: tuple[int, ...]
    log_ml_q: float
    log_ml_theta: float
    log_prior: float

    @property
    def total(self) -> float:
        return self.log_prior + self.log_ml_q + self.log_ml_theta


def log_ml_q(stats: SuffStats, hp: Hyperparams) -> float:
    """Log marginal likelihood of the exit rates.

    Each cell integrates ``q**M * exp(-q*T)`` against a Gamma density with
    shape ``alpha + 1`` and rate ``tau``.
    """
    a, t, _ = hp.cell_priors(stats.n_configs, stats.cardinality)
    M = stats.M_row
    T = stats.T
    cell = gammaln(a + M + 1) + (a + 1) * np.log(t) - gammaln(a + 1) - (a + M + 1) * np.log(t + T)
    return float(cell.sum())


def log_ml_theta(stats: SuffStats, hp: Hyperparams) -> float:
    """Log Dirichlet-multinomial marginal likelihood of the destinations."""
    m = stats.cardinality
    a, _, a_xy = hp.cell_priors(stats.n_configs, m)
    M = stats.M
    row = stats.M_row
    off = ~np.eye(m, dtype=bool)
    dest = (gammaln(a_xy + M) - gammaln(a_xy))[:, off].sum()
    return float((gammaln(a) - gammaln(a + row)).sum() + dest)


def score_stats(stats: SuffStats, hp: Hyperparams, parent_penalty: float = 0.0) -> NodeScore:
    """Score a node from precomputed statistics; the conditioning set is its
    parent set. ``parent_penalty`` is a log-prior cost per parent (0 gives the
    uniform structure prior)."""
    return NodeScore(stats.target, stats.cond, log_ml_q(stats, hp), log_ml_theta(stats, hp),
                     -parent_penalty * len(stats.cond))


def node_score(dataset: Dataset, node: int, parents: Sequence[int], hp: Hyperparams | None = None,
               parent_penalty: float = 0.0) -> NodeScore:
    return score_stats(compute_suffstats(dataset, node, parents), hp or Hyperparams(), parent_penalty)


def graph_score(dataset: Dataset, graph: DirectedGraph, hp: Hyperparams | None = None) -> float:
    """Bayesian score of a whole graph, the sum of its node scores."""
    return sum(node_score(dataset, k, graph.parents(k), hp).total for k in range(graph.n))


def log_likelihood(model: CtbnModel, dataset: Dataset) -> float:
    """Log density of the observed paths under ``model`` (transition part
    only; the initial states are not scored).

    Returns ``-inf`` when an observed jump has zero intensity.
    """
    total = 0.0
    for k, cim in enumerate(model.cims):
        st = compute_suffstats(dataset, k, cim.parents)
        mats = cim.matrices
        q = -np.diagonal(mats, axis1=1, axis2=2)
        total -= float((q * st.T).sum())
        m = cim.cardinality
        off = ~np.eye(m, dtype=bool)
        counts = st.M[:, off]
        rates = mats[:, off]
        if np.any((counts > 0) & (rates <= 0)):
            return -np.inf
        total += float(xlogy(counts, np.where(counts > 0, rates, 1.0)).sum())
    return total


def _mle_loglik(st: SuffStats) -> float:
    row = st.M_row
    q = np.divide(row, st.T, out=np.zeros_like(st.T), where=st.T > 0)
    ll = xlogy(row, q).sum() - row.sum()
    theta = np.divide(st.M, row[:, :, None], out=np.zeros(st.M.shape), where=row[:, :, None] > 0)
    ll += xlogy(st.M, theta).sum()
    return float(ll)


def mle_log_likelihood(graph: DirectedGraph, dataset: Dataset) -> float:
    """Log likelihood of ``dataset`` at the maximum-likelihood CIMs of ``graph``."""
    return sum(_mle_loglik(compute_suffstats(dataset, k, graph.parents(k))) for k in range(graph.n))


def n_free_parameters(graph: DirectedGraph, cardinalities: Sequence[int]) -> int:
    """Off-diagonal intensity entries summed over every parent configuration."""
    k = 0
    for node in range(graph.n):
        m = cardinalities[node]
        k += n_configs([cardinalities[p] for p in graph.parents(node)]) * m * (m - 1)
    return k


def model_bic(graph: DirectedGraph, dataset: Dataset) -> float:
    """``ln L - k/2 * ln(psi)`` with ``psi`` the number of transitions."""
    psi = dataset.n_transitions
    if psi == 0:
        raise ValueError("BIC is undefined for a dataset without transitions")
    k = n_free_parameters(graph, dataset.cardinalities)
    return float(mle_log_likelihood(graph, dataset) - 0.5 * k * np.log(psi))
