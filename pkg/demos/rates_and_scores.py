"""
From trajectories to rates and scores
=====================================

A two-node chain X -> Y where Y switches ten times faster when X is on.
The sufficient statistics expose the contrast directly; the Bayesian score
and BIC both prefer the true parent set.
"""

import numpy as np

from ctbnlearn import (Cim, CtbnModel, Dataset, DirectedGraph, Hyperparams, VariableSpec, compute_suffstats,
                       mle_cim, model_bic, node_score, posterior_params, sample_trajectory)

variables = [VariableSpec("X", 2), VariableSpec("Y", 2)]
cims = [Cim(0, (), (), np.array([[[-1.0, 1.0], [1.0, -1.0]]])),
        Cim(1, (0,), (2,), np.array([[[-1.0, 1.0], [1.0, -1.0]], [[-10.0, 10.0], [10.0, -10.0]]]))]
model = CtbnModel(variables, DirectedGraph(2, ((0, 1),)), cims)
rng = np.random.default_rng(3)
data = Dataset(variables, [sample_trajectory(model, 50.0, rng) for _ in range(20)])

# %% time in state and transition counts of Y, one row per state of X
st = compute_suffstats(data, 1, [0])
print("T[x, y] =\n", st.T.round(2))
print("exits   =\n", st.M_row)

# %% maximum-likelihood rates should sit near 1 and 10
est = mle_cim(st)
print("q_hat =\n", est.params.q.round(2))

# %% conjugate posterior on the rates
post = posterior_params(st, Hyperparams(alpha=1.0, tau=1.0))
print("posterior mean rate =\n", (post.gamma_shape / post.gamma_rate).round(2))

# %% parent-set comparison
for parents in [(), (0,)]:
    s = node_score(data, 1, parents)
    print(f"score(Y | {parents}) = {s.total:.1f}")
print("BIC chain", round(model_bic(DirectedGraph(2, ((0, 1),)), data), 1),
      "BIC empty", round(model_bic(DirectedGraph(2), data), 1))
