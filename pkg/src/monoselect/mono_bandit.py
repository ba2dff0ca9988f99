"""Bandit-feedback wrapper around a full-information learner.

Each round one draw from the exploration stream picks EXPLOIT with
probability ``1 - eps`` or arm ``j`` with probability ``eps / k``. Explore
rounds play ``j`` and record the importance-weighted vector
``k * b / eps * e_j``; exploit rounds play a draw from the inner learner and
record zeros. The inner learner is advanced once per round with the recorded
vector and never sees anything else.
"""
from __future__ import annotations

import copy
import math
from typing import Callable, Optional

import numpy as np

from monoselect.core import SeededRng, categorical

EXPLOIT = -1


def choose_epsilon(horizon: int, k: int, regret_bound: float) -> float:
    """Exploration rate minimising ``(k / eps) * R + eps * T``, clamped to 1."""
    if horizon < 1 or k < 1 or regret_bound < 0:
        raise ValueError("need horizon >= 1, k >= 1, regret_bound >= 0")
    return min(1.0, math.sqrt(k * regret_bound / horizon))


def branch_probabilities(k: int, epsilon: float) -> np.ndarray:
    """Probabilities of ``[EXPLOIT, arm 0, ..., arm k-1]`` for one round."""
    return np.concatenate([[1.0 - epsilon], np.full(k, epsilon / k)])


def recorded_vector(loss, branch: int, epsilon: float) -> np.ndarray:
    """The vector handed to the inner learner for a given explore branch."""
    l = np.asarray(loss, dtype=float)
    out = np.zeros_like(l)
    if branch != EXPLOIT:
        out[branch] = l.size * l[branch] / epsilon
    return out


def expected_recorded_vector(loss, epsilon: float) -> np.ndarray:
    """Exact expectation of :func:`recorded_vector` over the explore draw."""
    l = np.asarray(loss, dtype=float)
    k = l.size
    probs = branch_probabilities(k, epsilon)
    total = np.zeros(k)
    for branch, pr in zip([EXPLOIT, *range(k)], probs):
        if pr > 0:
            total += pr * recorded_vector(l, branch, epsilon)
    return total


def widened_range(k: int, epsilon: float, lo: float = 0.0, hi: float = 1.0) -> tuple[float, float]:
    """Range of recorded values the inner learner must be tuned for."""
    if epsilon <= 0:
        return (0.0, 0.0)
    return (min(0.0, k * lo / epsilon), max(0.0, k * hi / epsilon))


class MonoBandit:
    """Bandit learner built from a full-information ``inner`` learner.

    ``rng_b`` drives the explore/exploit draw and ``rng_f`` the inner
    learner's own sampling; both advance exactly once per round.
    """

    def __init__(self, inner, epsilon: float, seed: int = 0,
                 rng_b: Optional[SeededRng] = None, rng_f: Optional[SeededRng] = None):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.inner = inner
        self.k = inner.k
        self.epsilon = float(epsilon)
        self.rng_b = rng_b if rng_b is not None else SeededRng(seed, "R_b")
        self.rng_f = rng_f if rng_f is not None else SeededRng(seed, "R_f")
        self._branch_probs = branch_probabilities(self.k, self.epsilon)
        self.sampled_losses: list[np.ndarray] = []
        self.keep_history = False

    @property
    def current_p(self) -> np.ndarray:
        return self.inner.probs

    @property
    def probs(self) -> np.ndarray:
        """Marginal selection probabilities for the coming round."""
        return self.epsilon / self.k + (1.0 - self.epsilon) * self.inner.probs

    def select(self) -> tuple[int, bool]:
        branch = categorical(self._branch_probs, self.rng_b.uniform()) - 1
        u_f = self.rng_f.uniform()
        if branch != EXPLOIT:
            return branch, True
        return categorical(self.inner.probs, u_f), False

    def observe(self, arm: int, explore: bool, feedback: float) -> np.ndarray:
        rec = np.zeros(self.k)
        if explore:
            rec[arm] = self.k * feedback / self.epsilon
        if self.keep_history:
            self.sampled_losses.append(rec)
        self.inner.update(rec)
        return rec

    def play_round(self, feedback: Callable[[int], float]) -> tuple[int, bool]:
        """Select, query ``feedback(arm)`` for the realised loss, and learn."""
        arm, explore = self.select()
        b = feedback(arm)
        self.observe(arm, explore, b)
        return arm, explore

    def copy(self) -> "MonoBandit":
        return copy.deepcopy(self)


def mono_bandit_round(state: MonoBandit, rng_b: SeededRng, rng_f: SeededRng,
                      feedback: Callable[[int], float]) -> tuple[MonoBandit, int, bool]:
    """Functional form of :meth:`MonoBandit.play_round` with explicit streams."""
    new = copy.copy(state)
    new.inner = state.inner.copy()
    new.sampled_losses = list(state.sampled_losses)
    new.rng_b, new.rng_f = rng_b, rng_f
    arm, explore = new.play_round(feedback)
    return new, arm, explore
