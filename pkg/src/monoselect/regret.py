"""Empirical regret meters and closed-form bound calculators."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _check(plays, losses) -> tuple[np.ndarray, np.ndarray]:
    plays = np.asarray(plays, dtype=int)
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 2:
        raise ValueError("losses must be a T x k matrix")
    if plays.shape != (losses.shape[0],):
        raise ValueError(f"{plays.size} plays against {losses.shape[0]} loss rows")
    if plays.size and (plays.min() < 0 or plays.max() >= losses.shape[1]):
        raise ValueError("play index out of range")
    return plays, losses


def external_regret(plays, losses) -> tuple[float, int]:
    """Realised loss minus the best fixed arm's loss; ties go to the lowest index."""
    plays, losses = _check(plays, losses)
    incurred = losses[np.arange(plays.size), plays].sum()
    totals = losses.sum(axis=0)
    best = int(np.argmin(totals))
    return float(incurred - totals[best]), best


def _per_source_totals(plays: np.ndarray, losses: np.ndarray) -> np.ndarray:
    # S[i, j] = total loss of arm j over the rounds on which arm i was played
    k = losses.shape[1]
    S = np.zeros((k, k))
    np.add.at(S, plays, losses)
    return S


def swap_regret(plays, losses) -> tuple[float, tuple[int, ...]]:
    """Best per-arm reassignment in hindsight.

    The objective separates over source arms, so each source independently
    takes the target with the smallest summed loss on its own rounds.
    """
    plays, losses = _check(plays, losses)
    S = _per_source_totals(plays, losses)
    chi = tuple(int(j) for j in np.argmin(S, axis=1))
    value = float(np.trace(S) - S[np.arange(S.shape[0]), chi].sum())
    return value, chi


def expected_external_regret(dists, losses) -> tuple[float, int]:
    """External regret of the distributions themselves (no sampling noise)."""
    dists = np.asarray(dists, dtype=float)
    losses = np.asarray(losses, dtype=float)
    incurred = float(np.einsum("ti,ti->", dists, losses))
    totals = losses.sum(axis=0)
    best = int(np.argmin(totals))
    return incurred - float(totals[best]), best


def expected_swap_regret(dists, losses) -> tuple[float, tuple[int, ...]]:
    dists = np.asarray(dists, dtype=float)
    losses = np.asarray(losses, dtype=float)
    S = dists.T @ losses
    chi = tuple(int(j) for j in np.argmin(S, axis=1))
    return float(np.trace(S) - S[np.arange(S.shape[0]), chi].sum()), chi


def cumulative_regrets(plays, losses) -> tuple[np.ndarray, np.ndarray]:
    """External and swap regret of every prefix ``1..t``."""
    plays, losses = _check(plays, losses)
    T, k = losses.shape
    ext = np.empty(T)
    swp = np.empty(T)
    totals = np.zeros(k)
    S = np.zeros((k, k))
    incurred = 0.0
    for t in range(T):
        i = plays[t]
        row = losses[t]
        totals += row
        S[i] += row
        incurred += row[i]
        ext[t] = incurred - totals.min()
        swp[t] = float(np.trace(S) - S.min(axis=1).sum())
    return ext, swp


def mw_regret_bound(horizon: int, k: int) -> float:
    """``sqrt(log(k) * T)`` for Multiplicative Weights on losses in [0, 1]."""
    return math.sqrt(math.log(k) * horizon) if k > 1 else 0.0


def bound_mono_bandit(horizon: int, k: int, inner_bound: float) -> float:
    """``2 sqrt(k T R(T))`` for the bandit wrapper of an ``R(T)``-regret learner."""
    if horizon < 0 or k < 0 or inner_bound < 0:
        raise ValueError("inputs must be non-negative")
    return 2.0 * math.sqrt(k * horizon * inner_bound)


def bound_mono_bandit_mw(horizon: int, k: int) -> float:
    """``2 sqrt(k sqrt(log k)) T^(3/4)``."""
    return 2.0 * math.sqrt(k * math.sqrt(math.log(k))) * horizon**0.75 if k > 1 else 0.0


def treeswap_swap_bound(horizon: int, k: int, depth: int = 2) -> float:
    """Heuristic swap-regret scale of TreeSwap with tuned Hedge leaves.

    Sums the per-level external regret of the lazily updated instances,
    ``d * sqrt(log k) * T^(1 - 1/(2d))``. It omits the worst-case ``T/d``
    term of the general analysis, which alone exceeds ``T`` at small depth.
    """
    if k < 2:
        return 0.0
    return depth * math.sqrt(math.log(k)) * horizon ** (1.0 - 1.0 / (2 * depth))


@dataclass(frozen=True)
class RegretReport:
    external: float
    swap: float
    best_fixed_arm: int
    best_swap_function: tuple[int, ...]
    bound_external: float = float("nan")
    bound_swap: float = float("nan")

    @property
    def external_ok(self) -> bool:
        return self.external <= self.bound_external

    @property
    def swap_ok(self) -> bool:
        return self.swap <= self.bound_swap


def regret_report(plays, losses, bound_external: float = float("nan"),
                  bound_swap: float = float("nan")) -> RegretReport:
    ext, arm = external_regret(plays, losses)
    swp, chi = swap_regret(plays, losses)
    return RegretReport(ext, swp, arm, chi, bound_external, bound_swap)
