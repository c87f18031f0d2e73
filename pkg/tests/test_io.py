import json

import numpy as np
import pytest

from ctbnlearn.generator import GenConfig, generate_model, sample_dataset
from ctbnlearn.io import (dataset_from_dict, dataset_to_dict, graph_from_dict, model_from_dict, model_to_dict,
                          read_dataset, read_dataset_csv, read_graph, read_model, write_dataset,
                          write_dataset_csv, write_graph, write_model)
from ctbnlearn.model import validate_model
from ctbnlearn.stats import compute_suffstats


@pytest.fixture(scope="module")
def generated():
    cfg = GenConfig(n=4, density=0.4, cardinality=(2, 3, 2, 4), n_trajectories=3, duration=5.0, seed=6)
    model = generate_model(cfg)
    return model, sample_dataset(model, cfg)


def test_model_roundtrip(generated, tmp_path):
    model, _ = generated
    write_model(model, tmp_path / "m.json")
    back = read_model(tmp_path / "m.json")
    assert back.graph == model.graph and back.names == model.names
    for a, b in zip(back.cims, model.cims):
        np.testing.assert_array_equal(a.matrices, b.matrices)
        assert a.parents == b.parents
    assert validate_model(back) == []
    assert model_to_dict(model_from_dict(model_to_dict(model))) == model_to_dict(model)


def test_dataset_roundtrip_is_bit_stable(generated, tmp_path):
    _, data = generated
    write_dataset(data, tmp_path / "d.json")
    back = read_dataset(tmp_path / "d.json")
    assert dataset_to_dict(back) == dataset_to_dict(data)
    write_dataset(back, tmp_path / "d2.json")
    assert (tmp_path / "d.json").read_bytes() == (tmp_path / "d2.json").read_bytes()


def test_csv_roundtrip(generated, tmp_path):
    _, data = generated
    write_dataset_csv(data, tmp_path / "d.csv")
    durations = [tr.duration for tr in data.trajectories]
    back = read_dataset_csv(tmp_path / "d.csv", variables=data.variables, durations=durations)
    assert dataset_to_dict(back) == dataset_to_dict(data)
    for k in range(data.n):
        np.testing.assert_array_equal(compute_suffstats(back, k).M, compute_suffstats(data, k).M)


def test_csv_without_durations_ends_at_last_event(generated, tmp_path):
    _, data = generated
    write_dataset_csv(data, tmp_path / "d.csv")
    back = read_dataset_csv(tmp_path / "d.csv")
    for a, b in zip(back.trajectories, data.trajectories):
        assert a.duration == b.times[-1]
    assert back.n_transitions == data.n_transitions


def test_csv_rejects_multi_change_rows(tmp_path):
    (tmp_path / "bad.csv").write_text("trajectory_id,time,A,B\n0,0.0,0,0\n0,1.0,1,1\n")
    with pytest.raises(ValueError):
        read_dataset_csv(tmp_path / "bad.csv")


def test_graph_documents(generated, tmp_path):
    model, _ = generated
    write_graph(model.graph, model.names, tmp_path / "g.json", algorithm="test")
    g, names = read_graph(tmp_path / "g.json")
    assert g == model.graph and names == model.names
    assert json.loads((tmp_path / "g.json").read_text())["algorithm"] == "test"
    assert graph_from_dict(model_to_dict(model)) == (model.graph, model.names)
