"""Loss suites and the learner-vs-adversary simulation loop."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from monoselect.core import OnlineTranscript, SeededRng, categorical
from monoselect.full_info import BlumMansour, ExpWeights, TreeSwap, tuned_eta, tuned_expweights, tree_shape
from monoselect.mono_bandit import MonoBandit, choose_epsilon, widened_range
from monoselect.regret import mw_regret_bound, treeswap_swap_bound

LEARNERS = ("expweights", "blum-mansour", "treeswap", "monobandit-expweights", "monobandit-treeswap")


def iid_suite(k: int, horizon: int, seed: int) -> np.ndarray:
    """Bernoulli losses with per-arm means drawn once from U(0.2, 0.8)."""
    rng = SeededRng(seed, "suite/iid").generator
    means = rng.uniform(0.2, 0.8, size=k)
    return (rng.random((horizon, k)) < means).astype(float)


def switching_suite(k: int, horizon: int, seed: int = 0) -> np.ndarray:
    """Oblivious adversarial losses: the zero-loss arm rotates over doubling blocks."""
    losses = np.ones((horizon, k))
    start, length, block = 0, 8, 0
    while start < horizon:
        losses[start:start + length, block % k] = 0.0
        start += length
        length *= 2
        block += 1
    return losses


class FrequencyPunisher:
    """Adaptive adversary charging loss 1 to the most-played arm so far.

    Other arms get loss 0. It reads only the transcript prefix, so the
    current round's randomness cannot influence it.
    """

    def __init__(self, k: int):
        self.k = k
        self._counts = np.zeros(k, dtype=int)
        self._seen = 0

    def __call__(self, transcript: OnlineTranscript) -> np.ndarray:
        for row in transcript.rows[self._seen:]:
            self._counts[row.arm] += 1
        self._seen = len(transcript)
        out = np.zeros(self.k)
        out[int(np.argmax(self._counts))] = 1.0
        return out


def suite(name: str, k: int, horizon: int, seed: int):
    if name == "iid":
        return iid_suite(k, horizon, seed)
    if name == "switching":
        return switching_suite(k, horizon, seed)
    if name == "adaptive":
        return FrequencyPunisher(k)
    raise ValueError(f"unknown loss suite {name!r}")


def make_learner(name: str, k: int, horizon: int, seed: int = 0, eta: Optional[float] = None,
                 epsilon: Optional[float] = None, depth: int = 2, loss_range: tuple = (0.0, 1.0)):
    """Build a learner by name with horizon-tuned defaults.

    The bandit variants pick ``epsilon`` from the inner learner's regret bound
    unless one is given, and tune the inner learner for the widened range of
    importance-weighted losses.
    """
    lo, hi = loss_range
    span = hi - lo
    if name == "expweights":
        return ExpWeights(k, eta or tuned_eta(horizon, k, span))
    if name == "blum-mansour":
        return BlumMansour(k, eta or tuned_eta(horizon, k, span))
    if name == "treeswap":
        d, m = tree_shape(horizon, depth=depth)
        base = (lambda: ExpWeights(k, eta)) if eta else tuned_expweights(k, m, span)
        return TreeSwap(k, horizon, base, depth=d)
    if name == "monobandit-expweights":
        eps = epsilon if epsilon is not None else choose_epsilon(horizon, k, span * mw_regret_bound(horizon, k))
        wlo, whi = widened_range(k, eps, lo, hi)
        inner = ExpWeights(k, eta or tuned_eta(horizon, k, max(whi - wlo, 1.0)))
        return MonoBandit(inner, eps, seed=seed)
    if name == "monobandit-treeswap":
        eps = epsilon if epsilon is not None else choose_epsilon(horizon, k, span * treeswap_swap_bound(horizon, k, depth))
        wlo, whi = widened_range(k, eps, lo, hi)
        d, m = tree_shape(horizon, depth=depth)
        base = (lambda: ExpWeights(k, eta)) if eta else tuned_expweights(k, m, max(whi - wlo, 1.0))
        return MonoBandit(TreeSwap(k, horizon, base, depth=d), eps, seed=seed)
    raise ValueError(f"unknown learner {name!r}; expected one of {LEARNERS}")


@dataclass
class BanditRun:
    plays: np.ndarray
    explore: np.ndarray
    losses: np.ndarray
    transcript: OnlineTranscript


def simulate(learner, source: Union[np.ndarray, object], horizon: int, seed: int = 0) -> BanditRun:
    """Run ``learner`` for ``horizon`` rounds against a loss matrix or adaptive adversary.

    Bandit learners see only the loss of the arm they play. Full-information
    learners sample their arm from their own stream and observe the whole
    vector. The full loss matrix is returned for offline evaluation only.
    """
    transcript = OnlineTranscript(horizon)
    adaptive = callable(source)
    matrix = None if adaptive else np.asarray(source, dtype=float)
    k = learner.k
    losses = np.empty((horizon, k))
    plays = np.empty(horizon, dtype=int)
    explore = np.zeros(horizon, dtype=bool)
    bandit = isinstance(learner, MonoBandit)
    play_rng = None if bandit else SeededRng(seed, "play")
    for t in range(horizon):
        l = source(transcript) if adaptive else matrix[t]
        losses[t] = l
        if bandit:
            draw = learner.rng_b.next_id()
            arm, ex = learner.select()
            learner.observe(arm, ex, l[arm])
        else:
            draw = play_rng.next_id()
            arm, ex = categorical(learner.probs, play_rng.uniform()), None
            learner.update(l)
        plays[t] = arm
        explore[t] = bool(ex)
        transcript.append(arm, l[arm], ex, (draw,))
    return BanditRun(plays, explore, losses, transcript)
