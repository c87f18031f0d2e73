"""Constraint-based structure learning for CTBNs.

Starting from the complete directed graph, a candidate parent ``X_j`` of
``X_i`` is dropped as soon as some separating set ``S`` makes the CIM of
``X_i`` look the same with and without ``X_j`` in the conditioning set. Two
aspects of the CIM are compared cell by cell:

* exit rates, with an F test on the ratio of the two rate estimates;
* destination distributions, with a two-sample chi-square or
  Kolmogorov-Smirnov test on the transition counts (skipped for binary
  variables, whose destination is deterministic).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import stats as sps

from ._parallel import ordered_map
from .data import Dataset
from .model import DirectedGraph
from .stats import SuffStats, TargetStats, compute_suffstats

__all__ = [
    "CtpcConfig",
    "TestRecord",
    "IndependenceVerdict",
    "CtpcResult",
    "f_test_counts",
    "chi2_test_counts",
    "ks_test_counts",
    "f_test",
    "chi2_test",
    "ks_test",
    "test_independence",
    "learn_parents_ctpc",
    "learn_structure_ctpc",
    "verdicts_to_dict",
]


@dataclass(frozen=True)
class CtpcConfig:
    """Significance levels for the rate test and the destination test, the
    destination test to use (``"chi2"`` or ``"ks"``) and an optional bound on
    separating-set size."""

    alpha_q: float = 0.1
    alpha_theta: float = 0.1
    theta_test: str = "chi2"
    max_sepset: int | None = None

    def __post_init__(self):
        for a in (self.alpha_q, self.alpha_theta):
            if not 0 < a < 1:
                raise ValueError("significance levels must lie in (0, 1)")
        if self.theta_test not in ("chi2", "ks"):
            raise ValueError(f"unknown destination test {self.theta_test!r}")
        if self.max_sepset is not None and self.max_sepset < 0:
            raise ValueError("max_sepset must be non-negative")


@dataclass(frozen=True)
class TestRecord:
    test: str
    y: int
    s: int
    x: int
    statistic: float
    lower: float
    upper: float
    reject: bool
    insufficient: bool

    __test__ = False


@dataclass(frozen=True)
class IndependenceVerdict:
    target: int
    candidate: int
    sepset: tuple[int, ...]
    independent: bool
    records: tuple[TestRecord, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class CtpcResult:
    graph: DirectedGraph
    logs: tuple[tuple[IndependenceVerdict, ...], ...]


# -- test statistics on count arrays ------------------------------------------

def f_test_counts(exits_ext, time_ext, exits_base, time_base, level):
    """Two-sided F test on the ratio of base and extended exit-rate estimates.

    ``F = q_base / q_ext`` is referred to F(r1, r2) with ``r1`` the exits in
    the extended context and ``r2`` those in the base context. Cells with no
    exits on either side are flagged insufficient and never rejected.

    Returns ``(F, lower, upper, reject, insufficient)`` arrays.
    """
    r1 = np.asarray(exits_ext, dtype=float)
    r2 = np.asarray(exits_base, dtype=float)
    r1, r2, te, tb = np.broadcast_arrays(r1, r2, np.asarray(time_ext, float), np.asarray(time_base, float))
    insufficient = (r1 <= 0) | (r2 <= 0)
    ok = ~insufficient
    F = np.full(r1.shape, np.nan)
    lo = np.full(r1.shape, np.nan)
    hi = np.full(r1.shape, np.nan)
    F[ok] = (r2[ok] * te[ok]) / (tb[ok] * r1[ok])
    lo[ok] = sps.f.ppf(level / 2, r1[ok], r2[ok])
    hi[ok] = sps.f.ppf(1 - level / 2, r1[ok], r2[ok])
    reject = ok & ((F < lo) | (F > hi))
    return F, lo, hi, reject, insufficient


def chi2_test_counts(counts_ext, counts_base, level):
    """Two-sample chi-square test on destination counts (last axis).

    Destinations with zero counts on both sides are dropped from the sum; the
    reference distribution keeps ``m - 1`` degrees of freedom.

    Returns ``(statistic, threshold, reject, insufficient)``.
    """
    ce = np.asarray(counts_ext, dtype=float)
    cb = np.asarray(counts_base, dtype=float)
    m = ce.shape[-1]
    ne = ce.sum(axis=-1)
    nb = cb.sum(axis=-1)
    insufficient = (ne <= 0) | (nb <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.sqrt(nb / ne)[..., None]
        num = (K * ce - cb / K) ** 2
        den = ce + cb
        terms = np.where(den > 0, num / den, 0.0)
    stat = np.where(insufficient, np.nan, terms.sum(axis=-1))
    thr = sps.chi2.ppf(1 - level, m - 1)
    reject = ~insufficient & (stat > thr)
    return stat, np.full(stat.shape, thr), reject, insufficient


def ks_critical(level, n1, n2):
    """Large-sample two-sample KS critical value."""
    c = np.sqrt(-np.log(level / 2) / 2)
    return c * np.sqrt((n1 + n2) / (n1 * n2))


def ks_test_counts(counts_ext, counts_base, level):
    """Two-sample KS test on cumulative destination distributions, with the
    destinations ordered by state index.

    Returns ``(D, threshold, reject, insufficient)``.
    """
    ce = np.asarray(counts_ext, dtype=float)
    cb = np.asarray(counts_base, dtype=float)
    ne = ce.sum(axis=-1)
    nb = cb.sum(axis=-1)
    insufficient = (ne <= 0) | (nb <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cum_e = np.cumsum(ce, axis=-1) / ne[..., None]
        cum_b = np.cumsum(cb, axis=-1) / nb[..., None]
        D = np.abs(cum_e - cum_b).max(axis=-1)
        thr = ks_critical(level, ne, nb)
    D = np.where(insufficient, np.nan, D)
    thr = np.where(insufficient, np.nan, thr)
    reject = ~insufficient & (D > thr)
    return D, thr, reject, insufficient


# -- statistics alignment -----------------------------------------------------

def _aligned(ext: SuffStats, base: SuffStats):
    """Extended-context arrays indexed ``[y, s, ...]`` next to base arrays
    indexed ``[s, ...]``."""
    extra = [c for c in ext.cond if c not in base.cond]
    if ext.target != base.target or len(extra) != 1 or len(ext.cond) != len(base.cond) + 1:
        raise ValueError("extended statistics must add exactly one variable to the base set")
    y_var = extra[0]
    pos = ext.cond.index(y_var)
    T, M = ext.per_variable()
    T = np.moveaxis(T, pos, 0)
    M = np.moveaxis(M, pos, 0)
    cy = T.shape[0]
    ns, m = base.T.shape
    T = T.reshape((cy, ns, m), order="F")
    M = M.reshape((cy, ns, m, m), order="F")
    return y_var, T, M


def _cell_arrays(ext, base, x, y, s):
    _, T, M = _aligned(ext, base)
    return T[y, s, x], M[y, s, x], base.T[s, x], base.M[s, x]


def f_test(ext: SuffStats, base: SuffStats, x: int, y: int, s: int, level: float) -> TestRecord:
    """Rate test for state ``x`` of the target, candidate value ``y`` and
    separating-set configuration index ``s``."""
    te, me, tb, mb = _cell_arrays(ext, base, x, y, s)
    F, lo, hi, rej, ins = f_test_counts(me.sum(), te, mb.sum(), tb, level)
    return TestRecord("f", y, s, x, float(F), float(lo), float(hi), bool(rej), bool(ins))


def chi2_test(ext: SuffStats, base: SuffStats, x: int, y: int, s: int, level: float) -> TestRecord:
    _, me, _, mb = _cell_arrays(ext, base, x, y, s)
    stat, thr, rej, ins = chi2_test_counts(me, mb, level)
    return TestRecord("chi2", y, s, x, float(stat), -np.inf, float(thr), bool(rej), bool(ins))


def ks_test(ext: SuffStats, base: SuffStats, x: int, y: int, s: int, level: float) -> TestRecord:
    _, me, _, mb = _cell_arrays(ext, base, x, y, s)
    D, thr, rej, ins = ks_test_counts(me, mb, level)
    return TestRecord("ks", y, s, x, float(D), -np.inf, float(thr), bool(rej), bool(ins))


# -- independence test and search ---------------------------------------------

def test_independence(dataset: Dataset, target: int, candidate: int, sepset: Sequence[int],
                      config: CtpcConfig = CtpcConfig(), stats: TargetStats | None = None,
                      record: bool = True):
    """Decide whether ``target`` is independent of ``candidate`` given ``sepset``.

    Cells ``(y, s, x)`` are visited in that nesting order. In each cell the
    rate test runs first and the destination test only if the rate test does
    not reject; the first rejection decides dependence. Returns
    ``(independent, IndependenceVerdict)``. ``stats`` may supply a shared
    :class:`TargetStats` for ``target``.
    """
    sepset = tuple(sorted(sepset))
    if candidate == target or candidate in sepset or target in sepset:
        raise ValueError("candidate and target must be distinct and outside the separating set")
    if stats is None:
        base = compute_suffstats(dataset, target, sepset)
        ext = compute_suffstats(dataset, target, sepset + (candidate,))
    else:
        if stats.target != target:
            raise ValueError("statistics cache belongs to another target")
        base = stats(sepset)
        ext = stats(sepset + (candidate,))
    _, T, M = _aligned(ext, base)
    m = base.cardinality
    f_res = f_test_counts(M.sum(axis=-1), T, base.M_row[None], base.T[None], config.alpha_q)
    f_rej = f_res[3]
    run_theta = m > 2
    if run_theta:
        fn = chi2_test_counts if config.theta_test == "chi2" else ks_test_counts
        t_stat, t_thr, t_rej, t_ins = fn(M, np.broadcast_to(base.M[None], M.shape), config.alpha_theta)
        any_rej = f_rej | t_rej
    else:
        any_rej = f_rej
    flat = np.flatnonzero(any_rej.reshape(-1))
    independent = flat.size == 0
    stop = M.shape[0] * M.shape[1] * m if independent else int(flat[0]) + 1

    records = []
    if record:
        F, lo, hi, rej, ins = (a.reshape(-1) for a in f_res)
        if run_theta:
            ts, tt, tr, ti = (a.reshape(-1) for a in (t_stat, t_thr, t_rej, t_ins))
        shape = any_rej.shape
        for c in range(stop):
            y, s, x = np.unravel_index(c, shape)
            y, s, x = int(y), int(s), int(x)
            records.append(TestRecord("f", y, s, x, float(F[c]), float(lo[c]), float(hi[c]),
                                      bool(rej[c]), bool(ins[c])))
            if run_theta and not rej[c]:
                records.append(TestRecord(config.theta_test, y, s, x, float(ts[c]), -np.inf,
                                          float(tt[c]), bool(tr[c]), bool(ti[c])))
    return independent, IndependenceVerdict(target, candidate, sepset, independent, tuple(records))


test_independence.__test__ = False


def learn_parents_ctpc(dataset: Dataset, target: int, config: CtpcConfig = CtpcConfig(),
                       record: bool = True):
    """Prune the complete parent set of ``target``.

    For separating-set sizes ``b = 0, 1, ...`` every remaining candidate is
    tested against all size-``b`` subsets of the other remaining candidates,
    in lexicographic order; a candidate is removed at its first independence.
    Returns ``(parents, verdicts)``.
    """
    U = [j for j in range(dataset.n) if j != target]
    cache = TargetStats(dataset, target)
    log: list[IndependenceVerdict] = []
    b = 0
    while b <= len(U) - 1 and (config.max_sepset is None or b <= config.max_sepset):
        for j in list(U):
            rest = [u for u in U if u != j]
            for S in combinations(rest, b):
                indep, verdict = test_independence(dataset, target, j, S, config, cache, record)
                log.append(verdict)
                if indep:
                    U.remove(j)
                    break
        b += 1
    return tuple(U), log


def _node_task(payload, node):
    dataset, config, record = payload
    return learn_parents_ctpc(dataset, node, config, record)


def learn_structure_ctpc(dataset: Dataset, config: CtpcConfig = CtpcConfig(), jobs: int = 1,
                         record: bool = True) -> CtpcResult:
    results = ordered_map(_node_task, (dataset, config, record), range(dataset.n), jobs)
    graph = DirectedGraph.from_parent_sets([p for p, _ in results])
    return CtpcResult(graph, tuple(tuple(log) for _, log in results))


def verdicts_to_dict(result: CtpcResult, names: Sequence[str] | None = None) -> dict:
    """JSON-ready audit log of every independence test run."""
    def name(i):
        return names[i] if names is not None else i

    def clean(v):
        return None if isinstance(v, float) and not np.isfinite(v) else v

    nodes = []
    for k, log in enumerate(result.logs):
        entries = []
        for v in log:
            entries.append({
                "target": name(v.target),
                "candidate": name(v.candidate),
                "sepset": [name(s) for s in v.sepset],
                "independent": v.independent,
                "tests": [{key: clean(val) for key, val in asdict(r).items()} for r in v.records],
            })
        nodes.append({"node": name(k), "parents": [name(p) for p in result.graph.parents(k)],
                      "verdicts": entries})
    return {"nodes": nodes}


def dump_verdicts(result: CtpcResult, names=None) -> str:
    return json.dumps(verdicts_to_dict(result, names))
