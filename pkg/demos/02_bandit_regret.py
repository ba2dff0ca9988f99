"""
Monotone bandit regret at desk scale
====================================

Wrap exponential weights and TreeSwap in the explore/exploit wrapper,
run them on two loss suites and compare with the closed-form bounds.
"""
from __future__ import annotations

import numpy as np

from monoselect.bench import make_learner, simulate, suite
from monoselect.regret import bound_mono_bandit_mw, external_regret, swap_regret

k, T, seeds = 3, 4000, 10

# %% external regret of the exponential-weights variant
for name in ("iid", "switching"):
    regs = []
    for s in range(seeds):
        learner = make_learner("monobandit-expweights", k, T, seed=s)
        run = simulate(learner, suite(name, k, T, s), T, s)
        regs.append(external_regret(run.plays, run.losses)[0])
    print(f"{name:9s} mean external regret {np.mean(regs):7.1f}   bound {bound_mono_bandit_mw(T, k):7.1f}")

# %% swap regret of the TreeSwap variant as the horizon doubles
prev = None
for T_ in (1000, 2000, 4000, 8000):
    regs = []
    for s in range(seeds):
        run = simulate(make_learner("monobandit-treeswap", k, T_, seed=s), suite("switching", k, T_, s), T_, s)
        regs.append(swap_regret(run.plays, run.losses)[0])
    m = float(np.mean(regs))
    print(f"T={T_:5d} mean swap regret {m:7.1f}" + (f"   ratio {m / prev:.3f}" if prev else ""))
    prev = m
