"""Monotonicity checks for selection mechanisms.

A mechanism is monotone when lowering one arm's loss in one round never
lowers that arm's selection probability in any later round. Full-information
learners are compared on the distributions they emit. MonoBandit is compared
on exact marginals by enumerating every explore branch, or by paired Monte
Carlo for instances too large to enumerate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from monoselect.core import SeededRng
from monoselect.full_info import BlumMansour, run_full_info
from monoselect.mono_bandit import EXPLOIT, branch_probabilities, recorded_vector

MAX_BRANCHES = 10**6


class InstanceTooLarge(ValueError):
    """The exact enumeration would exceed ``MAX_BRANCHES``; use the Monte Carlo check."""


@dataclass(frozen=True)
class PerturbationPair:
    """Two loss sequences that differ only at ``base_losses[round, arm]``.

    ``round`` is 0-based; the second sequence has that cell lowered by ``delta``.
    """

    base_losses: np.ndarray
    round: int
    arm: int
    delta: float

    def __post_init__(self):
        L = np.asarray(self.base_losses, dtype=float)
        object.__setattr__(self, "base_losses", L)
        if not (0 <= self.round < L.shape[0] and 0 <= self.arm < L.shape[1]):
            raise ValueError("perturbed cell outside the loss matrix")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")

    @property
    def perturbed(self) -> np.ndarray:
        L = self.base_losses.copy()
        L[self.round, self.arm] -= self.delta
        return L


@dataclass
class MonotonicityVerdict:
    # (round, prob_base, prob_perturbed); rounds are 1-based
    violating_rounds: list = field(default_factory=list)
    tol: float = 0.0

    @property
    def monotone(self) -> bool:
        return not self.violating_rounds

    @property
    def max_violation(self) -> float:
        return max((pb - pp for _, pb, pp in self.violating_rounds), default=0.0)


def _compare(base: np.ndarray, pert: np.ndarray, rounds, tol: float) -> MonotonicityVerdict:
    verdict = MonotonicityVerdict(tol=tol)
    for t, pb, pp in zip(rounds, base, pert):
        if pp < pb - tol:
            verdict.violating_rounds.append((int(t), float(pb), float(pp)))
    return verdict


def check_full_info(factory: Callable, pair: PerturbationPair, tol: float = 1e-10) -> MonotonicityVerdict:
    """Compare arm ``pair.arm``'s probability after every update from the perturbed round on.

    Round ``t`` in the verdict means "the distribution held after the
    round-``t`` loss was observed", i.e. the one played in round ``t + 1``.
    """
    base = run_full_info(factory(), pair.base_losses)[:, pair.arm]
    pert = run_full_info(factory(), pair.perturbed)[:, pair.arm]
    start = pair.round
    rounds = range(start + 1, base.size + 1)
    return _compare(base[start:], pert[start:], rounds, tol)


def exact_play_probabilities(inner_factory: Callable, epsilon: float, losses) -> np.ndarray:
    """Exact marginal play probabilities of MonoBandit on an oblivious loss sequence.

    Row ``t`` (0-based) is the distribution of the arm played in round
    ``t + 1``; the final row is the round after the horizon. Sums over all
    ``(k + 1) ** T`` explore-branch sequences, sharing prefixes.
    """
    L = np.asarray(losses, dtype=float)
    T, k = L.shape
    if (k + 1) ** T > MAX_BRANCHES:
        raise InstanceTooLarge(f"{(k + 1) ** T} branches exceed {MAX_BRANCHES}")
    bprobs = branch_probabilities(k, epsilon)
    branches = [b for b, pr in zip([EXPLOIT, *range(k)], bprobs) if pr > 0]
    weights = {b: pr for b, pr in zip([EXPLOIT, *range(k)], bprobs)}
    out = np.zeros((T + 1, k))

    def walk(t: int, learner, weight: float):
        play = epsilon / k + (1.0 - epsilon) * learner.probs
        out[t] += weight * play
        if t == T:
            return
        for b in branches:
            child = learner.copy()
            child.update(recorded_vector(L[t], b, epsilon))
            walk(t + 1, child, weight * weights[b])

    walk(0, inner_factory(), 1.0)
    return out


def check_mono_bandit_exact(inner_factory: Callable, epsilon: float, pair: PerturbationPair,
                            tol: float = 1e-12) -> MonotonicityVerdict:
    """Exact monotonicity check over every explore-branch realisation.

    Compares the probability of playing ``pair.arm`` in every round after
    the perturbed one (1-based rounds ``round + 2 .. T + 1``).
    """
    base = exact_play_probabilities(inner_factory, epsilon, pair.base_losses)[:, pair.arm]
    pert = exact_play_probabilities(inner_factory, epsilon, pair.perturbed)[:, pair.arm]
    start = pair.round + 1
    rounds = range(start + 1, base.size + 1)
    return _compare(base[start:], pert[start:], rounds, tol)


def check_mono_bandit_mc(inner_factory: Callable, epsilon: float, pair: PerturbationPair,
                         n_samples: int = 10**5, seed: int = 0, z: float = 2.3263478740408408) -> MonotonicityVerdict:
    """Paired Monte Carlo monotonicity check for large instances.

    Each sample draws one explore-branch path and runs both sequences on it.
    Given the path, the play probability is exact, so only the path is
    sampled. A round is flagged only when the one-sided 99% upper bound of
    the mean paired difference is below ``-0``.
    """
    L0, L1 = pair.base_losses, pair.perturbed
    T, k = L0.shape
    bprobs = branch_probabilities(k, epsilon)
    gen = SeededRng(seed, "monotone/mc").generator
    start = pair.round + 1
    diffs = np.zeros((n_samples, T + 1 - start))
    base_mean = np.zeros(T + 1 - start)
    for s in range(n_samples):
        path = gen.choice(k + 1, size=T, p=bprobs) - 1
        a, b = inner_factory(), inner_factory()
        for t in range(T + 1):
            if t >= start:
                pa = epsilon / k + (1 - epsilon) * a.probs[pair.arm]
                pb = epsilon / k + (1 - epsilon) * b.probs[pair.arm]
                diffs[s, t - start] = pb - pa
                base_mean[t - start] += pa / n_samples
            if t < T:
                a.update(recorded_vector(L0[t], path[t], epsilon))
                b.update(recorded_vector(L1[t], path[t], epsilon))
    mean = diffs.mean(axis=0)
    se = diffs.std(axis=0, ddof=1) / math.sqrt(n_samples) if n_samples > 1 else np.zeros_like(mean)
    verdict = MonotonicityVerdict(tol=0.0)
    for j, (m, e) in enumerate(zip(mean, se)):
        if m + z * e < 0:
            verdict.violating_rounds.append((start + j + 1, float(base_mean[j]), float(base_mean[j] + m)))
    return verdict


def random_pairs(n: int, seed: int = 0, max_rounds: int = 200, max_arms: int = 5):
    """Random perturbation pairs with losses in [0, 1] and a positive decrease."""
    gen = SeededRng(seed, "monotone/pairs").generator
    for _ in range(n):
        T = int(gen.integers(2, max_rounds + 1))
        k = int(gen.integers(2, max_arms + 1))
        L = gen.random((T, k))
        yield PerturbationPair(L, int(gen.integers(0, T)), int(gen.integers(0, k)), float(gen.uniform(0.01, 1.0)))


# -- the Blum-Mansour counterexample ----------------------------------------

BM_ETA = 0.2


def counterexample_losses() -> tuple[np.ndarray, np.ndarray]:
    l1 = np.vstack([np.tile([-0.1, 1.0, 0.0], (50, 1)), np.tile([1.0, -1.0, 0.0], (50, 1))])
    l2 = l1.copy()
    l2[0] = [-2.0, 1.0, 0.0]
    return l1, l2


def load_golden() -> dict[str, tuple[list[int], np.ndarray]]:
    """Parse the bundled fixture into ``{section: (rounds, rows)}``."""
    text = resources.files("monoselect").joinpath("data/bm_counterexample.txt").read_text()
    out: dict = {}
    section = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            section = line.strip("[]")
            out[section] = ([], [])
        elif line.startswith("rounds"):
            out[section][0].extend(int(x) for x in line.split("=")[1].split())
        else:
            out[section][1].append([float(x) for x in line.split()])
    return {name: (rounds, np.array(rows)) for name, (rounds, rows) in out.items()}


@dataclass
class GoldenReport:
    l1: np.ndarray
    l2: np.ndarray
    mismatches: list
    verdict: MonotonicityVerdict
    tol: float

    @property
    def diff(self) -> np.ndarray:
        return self.l2 - self.l1

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def matrices(self, rounds=(1, 2, 3, 4, 5, 96, 97, 98, 99, 100)) -> dict[str, np.ndarray]:
        idx = np.asarray(rounds) - 1
        return {"l1": self.l1[idx], "l2": self.l2[idx], "diff": self.diff[idx]}


def reproduce_counterexample(tol: float = 1e-6) -> GoldenReport:
    """Run Blum-Mansour on the two counterexample sequences and compare to the fixture.

    ``mismatches`` lists ``(section, round, column, expected, got)`` for every
    cell off by more than ``tol``.
    """
    l1, l2 = counterexample_losses()
    d1 = run_full_info(BlumMansour(3, BM_ETA), l1)
    d2 = run_full_info(BlumMansour(3, BM_ETA), l2)
    computed = {"l1": d1, "l2": d2, "diff": d2 - d1}
    mismatches = []
    for name, (rounds, rows) in load_golden().items():
        for r, expected in zip(rounds, rows):
            got = computed[name][r - 1]
            for col in np.flatnonzero(np.abs(got - expected) > tol):
                mismatches.append((name, r, int(col), float(expected[col]), float(got[col])))
    pair = PerturbationPair(l1, 0, 0, 1.9)
    verdict = check_full_info(lambda: BlumMansour(3, BM_ETA), pair, tol=0.0)
    return GoldenReport(d1, d2, mismatches, verdict, tol)
