"""
Selecting agents under a linear contract
========================================

Two agents with quadratic effort costs. The principal picks one agent (or
nobody) each round with a monotone bandit. In the tab game nothing is paid
until the end and each agent receives the positive part of their tab.
"""
from __future__ import annotations

import numpy as np

from monoselect import AgentSpec, LearnerMechanism, Linear, OutcomeModel, play_game1, play_game2, policy_regret
from monoselect.bench import make_learner
from monoselect.contracting import Boosted, QuadraticCost, liability_bound, myopic_action
from monoselect.regret import bound_mono_bandit_mw, treeswap_swap_bound

model = OutcomeModel.binary([(0.2, 0.3), (0.3, 0.6)], low=-0.2, high=1.0)
agents = [AgentSpec(QuadraticCost(0.2)), AgentSpec(QuadraticCost(0.2))]
contract = Linear(0.3)
T = 3000
states = np.zeros(T, dtype=int)

# %% one-round best responses
for i in range(2):
    print(f"agent {i} myopic effort {myopic_action(agents[i], model, contract, i, [1.0]):.3f}")

# %% pay-as-you-go game: policy regret against always hiring the best agent
for label, ag in (("myopic", agents), ("boosted 0.1", [AgentSpec(QuadraticCost(0.2), Boosted(0.1))] * 2)):
    pr = []
    for s in range(5):
        mech = LearnerMechanism(2, make_learner("monobandit-expweights", 3, T, seed=s))
        tr = play_game1(mech, ag, model, contract, states, seed=s)
        pr.append(policy_regret(tr, model, contract, agents, states, expected=True))
    print(f"{label:12s} policy regret {np.mean(pr):7.1f}   bound {bound_mono_bandit_mw(T, 3):7.1f}")

# %% tab game: raw tabs can go negative, payouts cannot
mech = LearnerMechanism(2, make_learner("monobandit-treeswap", 3, T, seed=0))
tr = play_game2(mech, agents, model, contract, states, seed=0)
print("raw tabs", np.round(tr.ledger.tabs, 2), "lowest", np.round(tr.ledger.lowest, 2), "payouts", np.round(tr.payouts, 2))
print("tab lower bound", round(liability_bound(0.3, T, 3, treeswap_swap_bound(T, 3)), 1))
