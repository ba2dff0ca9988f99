"""
Which learners are monotone?
============================

Lower one arm's loss in one round and watch that arm's probability in every
later round. Exponential weights never lets it drop. Blum-Mansour can.
"""
from __future__ import annotations

import numpy as np

from monoselect import ExpWeights, BlumMansour, PerturbationPair, check_full_info
from monoselect.monotone import counterexample_losses, reproduce_counterexample

# %% the bundled two-phase loss sequence; the second copy lowers arm 0 in round 1
l1, l2 = counterexample_losses()
pair = PerturbationPair(l1, 0, 0, float(l1[0, 0] - l2[0, 0]))
print("lowered arm 0 in round 1 by", pair.delta)

for name, factory in (("exp-weights", lambda: ExpWeights(3, 0.2)), ("blum-mansour", lambda: BlumMansour(3, 0.2))):
    v = check_full_info(factory, pair, tol=0.0)
    print(f"{name:13s} monotone={v.monotone}  worst drop={v.max_violation:.3e}")

# %% the same run checked cell by cell against the fixture
rep = reproduce_counterexample()
print("fixture cells off by more than 1e-6:", len(rep.mismatches))
for t, pb, pp in rep.verdict.violating_rounds[-2:]:
    print(f"round {t}: p0 {pb:.6f} -> {pp:.6f} ({pp - pb:+.3e})")

# %% arm-0 probability gap over time
gap = rep.l2[:, 0] - rep.l1[:, 0]
print("gap at rounds 1, 50, 51, 100:", np.round(gap[[0, 49, 50, 99]], 6))
