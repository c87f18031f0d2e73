import numpy as np
import pytest

from ctbnlearn.data import Dataset
from ctbnlearn.generator import sample_trajectory
from ctbnlearn.model import Cim, CtbnModel, DirectedGraph, VariableSpec

EATING, FULL, HUNGRY = 0, 1, 2


def binary_cim(target, parents, matrices):
    return Cim(target, tuple(parents), (2,) * len(parents), np.array(matrices, dtype=float))


def eating_model() -> CtbnModel:
    """Three-node feedback loop: Eating -> FullStomach -> Hungry -> Eating."""
    variables = [VariableSpec("Eating", 2), VariableSpec("FullStomach", 2), VariableSpec("Hungry", 2)]
    graph = DirectedGraph(3, ((HUNGRY, EATING), (EATING, FULL), (FULL, HUNGRY)))
    cims = [
        # Hungry=no: stop eating at rate 10; Hungry=yes: start eating at rate 2
        binary_cim(EATING, [HUNGRY], [[[-0.01, 0.01], [10.0, -10.0]], [[-2.0, 2.0], [0.01, -0.01]]]),
        binary_cim(FULL, [EATING], [[[-0.01, 0.01], [0.40, -0.40]], [[-2.0, 2.0], [0.01, -0.01]]]),
        binary_cim(HUNGRY, [FULL], [[[-10.0, 10.0], [0.01, -0.01]], [[-0.01, 0.01], [5.0, -5.0]]]),
    ]
    return CtbnModel(variables, graph, cims)


def chain_model(n_extra=0, base=1.0, contrast=10.0) -> CtbnModel:
    """X -> Y where Y's rates differ by ``contrast`` across X's states, plus
    ``n_extra`` independent binary nodes."""
    n = 2 + n_extra
    variables = [VariableSpec(nm, 2) for nm in ["X", "Y"] + [f"Z{i}" for i in range(n_extra)]]
    graph = DirectedGraph(n, ((0, 1),))
    cims = [binary_cim(0, [], [[[-base, base], [base, -base]]]),
            binary_cim(1, [0], [[[-base, base], [base, -base]],
                                [[-base * contrast, base * contrast], [base * contrast, -base * contrast]]])]
    for k in range(2, n):
        r = 1.0 + 0.5 * k
        cims.append(binary_cim(k, [], [[[-r, r], [r, -r]]]))
    return CtbnModel(variables, graph, cims)


def sample(model, h, duration, seed) -> Dataset:
    rng = np.random.default_rng(seed)
    return Dataset(model.variables, [sample_trajectory(model, duration, rng) for _ in range(h)])


@pytest.fixture(scope="session")
def eating():
    return eating_model()


@pytest.fixture(scope="session")
def eating_data(eating):
    return sample(eating, 300, 100.0, 100)


@pytest.fixture(scope="session")
def chain_data():
    return sample(chain_model(), 20, 50.0, 3)
