import networkx as nx
import numpy as np
import pytest
from scipy import stats as sps

from ctbnlearn.data import Dataset
from ctbnlearn.generator import (GenConfig, generate_cims, generate_graph, generate_model, sample_dataset,
                                 sample_trajectory, target_arc_count)
from ctbnlearn.io import dataset_to_dict
from ctbnlearn.model import Cim, CtbnModel, DirectedGraph, VariableSpec, validate_model
from ctbnlearn.stats import compute_suffstats


def single(q, m=2):
    Q = np.full((m, m), q / (m - 1))
    np.fill_diagonal(Q, -q)
    return CtbnModel([VariableSpec("A", m)], DirectedGraph(1), [Cim(0, (), (), Q[None])])


def sojourns(traj):
    return np.diff(np.concatenate([[0.0], traj.times]))


def test_infeasible_density_names_bound():
    with pytest.raises(ValueError, match="n-1 = 4"):
        generate_graph(GenConfig(n=5, density=0.1))


def test_clamped_density_gives_tree():
    g = generate_graph(GenConfig(n=5, density=0.1, clamp_density=True))
    assert len(g.arcs) == 4
    assert nx.is_weakly_connected(nx.DiGraph(list(g.arcs)))


@pytest.mark.parametrize("seed", range(10))
def test_density_and_connectivity(seed):
    g = generate_graph(GenConfig(n=5, density=0.2, seed=seed))
    assert len(g.arcs) == 4
    dg = nx.DiGraph()
    dg.add_nodes_from(range(5))
    dg.add_edges_from(g.arcs)
    assert nx.is_weakly_connected(dg)
    g10 = generate_graph(GenConfig(n=10, density=0.3, seed=seed))
    assert len(g10.arcs) == target_arc_count(10, 0.3) == 27


def test_two_nodes_one_arc():
    assert len(generate_graph(GenConfig(n=2, density=0.5)).arcs) == 1


def test_generated_model_is_valid():
    cfg = GenConfig(n=6, density=0.3, cardinality=(2, 3, 4, 2, 3, 2), seed=4)
    model = generate_model(cfg)
    assert validate_model(model) == []
    for cim in model.cims:
        q = -np.diagonal(cim.matrices, axis1=1, axis2=2)
        assert np.all((q >= 1) & (q <= 10))
        if cim.cardinality == 2:
            np.testing.assert_allclose(cim.matrices[:, [0, 1], [1, 0]], q)


def test_graph_streams_do_not_depend_on_cardinality():
    a = generate_model(GenConfig(n=5, density=0.3, cardinality=2, seed=9))
    b = generate_model(GenConfig(n=5, density=0.3, cardinality=3, seed=9))
    assert a.graph == b.graph


def test_sojourn_mean_within_three_se():
    for i, q in enumerate([0.5, 1.0, 2.0, 5.0, 9.0]):
        tr = sample_trajectory(single(q), 4000.0 / q, seed=100 + i)
        s = sojourns(tr)
        se = (1 / q) / np.sqrt(len(s))
        assert abs(s.mean() - 1 / q) < 3 * se, (q, s.mean())


def test_sojourns_are_exponential():
    q = 3.0
    tr = sample_trajectory(single(q), 10_000 / q * 1.05, seed=7)
    s = sojourns(tr)[:10_000]
    assert len(s) == 10_000
    assert sps.kstest(s, "expon", args=(0, 1 / q)).pvalue > 0.01


def test_unit_rate_both_states():
    tr = sample_trajectory(single(1.0), 10_000.0, seed=1)
    s = sojourns(tr)
    path = tr.path()[:-1, 0]
    for x in (0, 1):
        sx = s[path == x]
        assert abs(sx.mean() - 1.0) < 3 / np.sqrt(len(sx))


def test_independent_variables_rates():
    model = CtbnModel([VariableSpec("A", 2), VariableSpec("B", 3)], DirectedGraph(2),
                      [Cim(0, (), (), np.array([[[-2, 2], [0.5, -0.5]]], float)),
                       Cim(1, (), (), np.array([[[-3, 1, 2], [1, -1, 0], [0, 4, -4]]], float))])
    data = Dataset(model.variables, [sample_trajectory(model, 2000.0, seed=5)])
    for k, rates in ((0, [2, 0.5]), (1, [3, 1, 4])):
        st = compute_suffstats(data, k)
        for x, q in enumerate(rates):
            n = st.M_row[0, x]
            assert abs(n / st.T[0, x] - q) < 3 * np.sqrt(n) / st.T[0, x]


def test_zero_rates_absorb():
    model = CtbnModel([VariableSpec("A", 2)], DirectedGraph(1), [Cim(0, (), (), np.zeros((1, 2, 2)))])
    tr = sample_trajectory(model, 10.0, seed=0)
    assert tr.n_events == 0 and tr.absorbed


def test_event_counts_match_stats():
    cfg = GenConfig(n=4, density=0.5, cardinality=3, n_trajectories=5, duration=20.0, seed=2)
    data = sample_dataset(generate_model(cfg), cfg)
    for k in range(4):
        events = sum(int((tr.variables == k).sum()) for tr in data.trajectories)
        assert compute_suffstats(data, k).M.sum() == events


def test_dataset_shape_and_determinism():
    cfg = GenConfig(n=5, density=0.2, n_trajectories=300, duration=100.0, seed=1)
    model = generate_model(cfg)
    data = sample_dataset(model, cfg)
    assert len(data) == 300
    assert abs(np.mean([tr.duration for tr in data.trajectories]) - 100) < 10
    again = sample_dataset(generate_model(cfg), cfg)
    assert dataset_to_dict(again) == dataset_to_dict(data)


def test_trajectory_invariants():
    cfg = GenConfig(n=4, density=0.5, cardinality=3, n_trajectories=3, duration=10.0, seed=8)
    for tr in sample_dataset(generate_model(cfg), cfg).trajectories:
        assert np.all(np.diff(tr.times) > 0)
        assert tr.times[0] > 0 and tr.times[-1] <= tr.duration
        path = tr.path()
        changed = (path[1:] != path[:-1]).sum(axis=1)
        assert np.all(changed == 1)


def test_empty_dataset():
    cfg = GenConfig(n=3, density=0.5, n_trajectories=0)
    data = sample_dataset(generate_model(cfg), cfg)
    assert len(data) == 0 and data.n_transitions == 0
