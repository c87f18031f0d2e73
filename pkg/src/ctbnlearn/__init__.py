"""Structure learning for continuous-time Bayesian networks.

Score-based search (:mod:`ctbnlearn.ctss`) and constraint-based search
(:mod:`ctbnlearn.ctpc`) over a shared model, sampler and statistics layer.
"""
from .ctpc import CtpcConfig, CtpcResult, learn_parents_ctpc, learn_structure_ctpc
from .ctss import CtssConfig, CtssResult, learn_parents_ctss, learn_structure_ctss
from .data import Dataset, Trajectory
from .evaluation import EvalReport, compare_graphs, delta_bic_percent, evaluate
from .generator import GenConfig, generate_model, sample_dataset, sample_trajectory
from .model import (Cim, CtbnModel, DirectedGraph, QThetaParams, VariableSpec,
                    cim_to_params, params_to_cim, validate_model)
from .scoring import graph_score, log_likelihood, model_bic, node_score
from .stats import Hyperparams, SuffStats, compute_suffstats, mle_cim, posterior_params

__version__ = "0.1.0"

__all__ = [
    "Cim", "CtbnModel", "DirectedGraph", "QThetaParams", "VariableSpec",
    "cim_to_params", "params_to_cim", "validate_model",
    "Dataset", "Trajectory",
    "GenConfig", "generate_model", "sample_dataset", "sample_trajectory",
    "Hyperparams", "SuffStats", "compute_suffstats", "mle_cim", "posterior_params",
    "graph_score", "log_likelihood", "model_bic", "node_score",
    "CtssConfig", "CtssResult", "learn_parents_ctss", "learn_structure_ctss",
    "CtpcConfig", "CtpcResult", "learn_parents_ctpc", "learn_structure_ctpc",
    "EvalReport", "compare_graphs", "delta_bic_percent", "evaluate",
]
