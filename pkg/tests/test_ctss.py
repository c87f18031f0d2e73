import numpy as np
import pytest

from ctbnlearn.ctss import CtssConfig, learn_parents_ctss, learn_structure_ctss
from ctbnlearn.data import Dataset, Trajectory
from ctbnlearn.generator import GenConfig, generate_model, sample_dataset
from ctbnlearn.model import VariableSpec
from ctbnlearn.scoring import node_score
from ctbnlearn.stats import Hyperparams

from conftest import chain_model, sample


def brute_force_parents(dataset, node, hp=Hyperparams()):
    """Score every subset by bitmask and rank by (score desc, size, tuple)."""
    others = [j for j in range(dataset.n) if j != node]
    ranked = []
    for mask in range(1 << len(others)):
        ps = tuple(others[i] for i in range(len(others)) if mask >> i & 1)
        ranked.append((-node_score(dataset, node, ps, hp).total, len(ps), ps))
    ranked.sort()
    return ranked[0][2], -ranked[0][0]


def fixture(seed, n=4, h=10, duration=10.0, card=2):
    cfg = GenConfig(n=n, density=0.3, cardinality=card, n_trajectories=h, duration=duration, seed=seed)
    model = generate_model(cfg)
    return model, sample_dataset(model, cfg)


def test_chain_recovered(chain_data):
    parents, score = learn_parents_ctss(chain_data, 1, CtssConfig(max_parents=2))
    assert parents == (0,)
    assert score.parents == (0,)


@pytest.mark.parametrize("seed", range(8))
def test_exhaustive_equals_brute_force(seed):
    model, data = fixture(seed, h=3, duration=5.0, card=(2, 3, 2, 2))
    for node in range(4):
        got, s = learn_parents_ctss(data, node, CtssConfig(max_parents=3))
        want, ws = brute_force_parents(data, node)
        assert got == want
        assert s.total == pytest.approx(ws, rel=1e-12)


def test_hill_climb_agrees_with_exhaustive():
    agree = 0
    for seed in range(50):
        _, data = fixture(500 + seed, h=5, duration=5.0)
        ex = learn_structure_ctss(data, CtssConfig(max_parents=3)).graph
        hc = learn_structure_ctss(data, CtssConfig(max_parents=3, mode="hill_climb")).graph
        agree += ex == hc
    assert agree >= 45


def test_max_parents_bound():
    _, data = fixture(3, n=5, h=20)
    for k in range(3):
        res = learn_structure_ctss(data, CtssConfig(max_parents=k))
        assert all(len(res.graph.parents(j)) <= k for j in range(5))


def test_empty_dataset_gives_empty_graph():
    data = Dataset([VariableSpec(f"V{i}", 2) for i in range(3)], [])
    assert learn_structure_ctss(data).graph.arcs == ()


def test_eating_cycle(eating, eating_data):
    assert learn_structure_ctss(eating_data).graph == eating.graph


def test_duplicated_data_keeps_argmax(chain_data):
    doubled = chain_data + chain_data
    assert learn_parents_ctss(doubled, 1)[0] == learn_parents_ctss(chain_data, 1)[0] == (0,)


def project(dataset, keep):
    """Dataset restricted to the variables in ``keep``."""
    trajs = []
    for tr in dataset.trajectories:
        mask = np.isin(tr.variables, keep)
        remap = {v: i for i, v in enumerate(keep)}
        trajs.append(Trajectory(tr.initial[keep], tr.times[mask], [remap[v] for v in tr.variables[mask]],
                                tr.states[mask], tr.duration))
    return Dataset([dataset.variables[k] for k in keep], trajs)


def test_unrelated_columns_do_not_matter():
    data = sample(chain_model(n_extra=2), 10, 20.0, 4)
    full = learn_parents_ctss(data, 1)
    reduced = learn_parents_ctss(project(data, [0, 1]), 1)
    assert full[0] == reduced[0] == (0,)
    assert full[1].total == pytest.approx(reduced[1].total, rel=1e-12)


def test_jobs_do_not_change_result():
    _, data = fixture(9, n=5, h=20)
    a = learn_structure_ctss(data, jobs=1)
    b = learn_structure_ctss(data, jobs=4)
    assert a.graph == b.graph
    assert [s.total for s in a.scores] == [s.total for s in b.scores]


def test_five_node_binary_recovery():
    cfg = GenConfig(n=5, density=0.2, n_trajectories=100, duration=100.0, seed=0)
    model = generate_model(cfg)
    assert learn_structure_ctss(sample_dataset(model, cfg)).graph == model.graph


def test_config_validation():
    with pytest.raises(ValueError):
        CtssConfig(mode="tabu")
    with pytest.raises(ValueError):
        CtssConfig(max_parents=-1)
