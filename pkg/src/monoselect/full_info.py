"""Full-information learners: Exponential Weights, Blum-Mansour and TreeSwap.

Every learner exposes the same small surface::

    learner.probs          # distribution to play this round
    learner.update(loss)   # observe a full loss vector, return next probs
    learner.copy()

and a functional ``*_step(state, loss) -> (new_state, probs)`` wrapper that
leaves its input untouched.
"""
from __future__ import annotations

import copy
import math
from typing import Callable, Optional

import numpy as np

from monoselect.core import NumericalError, check_distribution

FIXED_POINT_TOL = 1e-10
POWER_ITER_CAP = 10**6
DIRECT_SOLVE_MAX_K = 64


def tuned_eta(horizon: int, k: int, loss_range: float = 1.0) -> float:
    """Hedge learning rate ``sqrt(8 ln k / T) / range`` for a known horizon."""
    if k < 2:
        return 1.0
    return math.sqrt(8.0 * math.log(k) / max(horizon, 1)) / loss_range


def _softmax_from_log(logw: np.ndarray) -> np.ndarray:
    z = np.exp(logw - logw.max())
    return z / z.sum()


class ExpWeights:
    """Exponential Weights with a fixed learning rate.

    Weights are kept in log space and shifted so the largest log-weight is
    zero after every update. The shift is a common rescaling of all weights,
    so the emitted distribution is unchanged.
    """

    def __init__(self, k: int, eta: float):
        if eta <= 0:
            raise ValueError("eta must be positive")
        self.k = int(k)
        self.eta = float(eta)
        self.log_weights = np.zeros(self.k)
        self.probs = np.full(self.k, 1.0 / self.k)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def update(self, loss) -> np.ndarray:
        l = np.asarray(loss, dtype=float)
        if l.shape != (self.k,):
            raise ValueError(f"loss has shape {l.shape}, expected ({self.k},)")
        logw = self.log_weights - self.eta * l
        logw -= logw.max()
        self.log_weights = logw
        z = np.exp(logw)
        self.probs = z / z.sum()
        return self.probs

    def copy(self) -> "ExpWeights":
        return copy.deepcopy(self)


def stationary_distribution(Q) -> np.ndarray:
    """Return ``p`` with ``Q @ p == p`` for a column-stochastic ``Q``.

    Column ``i`` of ``Q`` is a distribution. Strictly positive matrices have a
    unique fixed point, found by a direct linear solve. Otherwise power
    iteration runs from the uniform vector, which also fixes the tie-break for
    reducible matrices; a least-squares solve is the last resort for small
    ``k`` (periodic chains).
    """
    Q = np.asarray(Q, dtype=float)
    k = Q.shape[0]
    if Q.shape != (k, k):
        raise ValueError("Q must be square")
    for i in range(k):
        check_distribution(Q[:, i], atol=1e-9)

    if np.all(Q > 0) and k <= DIRECT_SOLVE_MAX_K:
        p = _direct_solve(Q)
        if p is not None:
            return p

    p = np.full(k, 1.0 / k)
    residual = np.inf
    for _ in range(POWER_ITER_CAP):
        nxt = Q @ p
        residual = np.abs(nxt - p).max()
        p = nxt / nxt.sum()
        if residual <= FIXED_POINT_TOL:
            break
    if residual <= FIXED_POINT_TOL:
        return p
    if k <= DIRECT_SOLVE_MAX_K:
        p = _direct_solve(Q, lstsq=True)
        if p is not None:
            return p
    raise NumericalError("fixed-point iteration did not converge", residual)


def _direct_solve(Q: np.ndarray, lstsq: bool = False) -> Optional[np.ndarray]:
    k = Q.shape[0]
    A = Q - np.eye(k)
    A[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    try:
        if lstsq:
            A = np.vstack([Q - np.eye(k), np.ones((1, k))])
            b = np.zeros(k + 1)
            b[-1] = 1.0
            p = np.linalg.lstsq(A, b, rcond=None)[0]
        else:
            p = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if np.any(p < -1e-9):
        return None
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    if np.abs(Q @ p - p).max() > FIXED_POINT_TOL:
        return None
    return p


class BlumMansour:
    """Blum-Mansour swap-regret learner over ``k`` copies of Exponential Weights.

    Copy ``i`` sees ``p[i] * loss`` where ``p`` is the distribution that was in
    play, and the next distribution is the fixed point of the matrix whose
    ``i``-th column is copy ``i``'s distribution.
    """

    def __init__(self, k: int, eta: float):
        if eta <= 0:
            raise ValueError("eta must be positive")
        self.k = int(k)
        self.eta = float(eta)
        # row i holds the log-weights of copy i
        self.log_weights = np.zeros((self.k, self.k))
        self.probs = np.full(self.k, 1.0 / self.k)

    def copy_distribution(self, i: int) -> np.ndarray:
        return _softmax_from_log(self.log_weights[i])

    @property
    def matrix(self) -> np.ndarray:
        z = np.exp(self.log_weights - self.log_weights.max(axis=1, keepdims=True))
        return (z / z.sum(axis=1, keepdims=True)).T

    def update(self, loss) -> np.ndarray:
        l = np.asarray(loss, dtype=float)
        if l.shape != (self.k,):
            raise ValueError(f"loss has shape {l.shape}, expected ({self.k},)")
        self.log_weights = self.log_weights - self.eta * np.outer(self.probs, l)
        self.log_weights -= self.log_weights.max(axis=1, keepdims=True)
        self.probs = stationary_distribution(self.matrix)
        return self.probs

    def copy(self) -> "BlumMansour":
        return copy.deepcopy(self)


def tree_shape(horizon: int, depth: Optional[int] = None, branching: Optional[int] = None) -> tuple[int, int]:
    """Resolve ``(depth, branching)`` so that ``branching ** depth >= horizon``.

    Give exactly one of the two; the other is the smallest integer that
    covers the horizon.
    """
    if (depth is None) == (branching is None):
        raise ValueError("configure exactly one of depth and branching")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if depth is not None:
        if depth < 1:
            raise ValueError("depth must be >= 1")
        m = max(1, int(round(horizon ** (1.0 / depth))))
        while m**depth < horizon:
            m += 1
        while m > 1 and (m - 1) ** depth >= horizon:
            m -= 1
        return depth, max(m, 2) if horizon > 1 else 1
    if branching < 2:
        raise ValueError("branching must be >= 2")
    d = 1
    while branching**d < horizon:
        d += 1
    return d, branching


def tuned_expweights(k: int, n_updates: int, loss_range: float = 1.0) -> Callable[[], ExpWeights]:
    eta = tuned_eta(n_updates, k, loss_range)
    return lambda: ExpWeights(k, eta)


class TreeSwap:
    """Lazy-tree swap-regret learner over a base external-regret algorithm.

    Rounds ``0..M**d - 1`` are the leaves of an ``M``-ary tree of depth ``d``.
    Level ``h`` (0 = root) holds one base instance per node on the current
    root-to-leaf path. That instance plays for ``M**(d-1-h)`` rounds at a time
    and is updated with the average loss of each such period; a fresh instance
    starts whenever the path moves to a new node at that level. The emitted
    distribution is the uniform mixture of the ``d`` active instances.

    ``base`` is a zero-argument factory returning a fresh learner.
    """

    def __init__(self, k: int, horizon: int, base: Callable, depth: Optional[int] = 2,
                 branching: Optional[int] = None):
        if branching is not None:
            depth = None
        self.k = int(k)
        self.horizon = int(horizon)
        self.depth, self.branching = tree_shape(self.horizon, depth, branching)
        self.base = base
        d, m = self.depth, self.branching
        self.periods = [m ** (d - 1 - h) for h in range(d)]
        self.instances = [base() for _ in range(d)]
        self.acc = np.zeros((d, self.k))
        self.count = np.zeros(d, dtype=int)
        self.t = 0
        self.probs = self._mixture()

    def _mixture(self) -> np.ndarray:
        p = self.instances[0].probs.copy()
        for inst in self.instances[1:]:
            p += inst.probs
        return p / p.sum()

    def update(self, loss) -> np.ndarray:
        if self.t >= self.horizon:
            raise ValueError(f"TreeSwap horizon {self.horizon} exhausted")
        l = np.asarray(loss, dtype=float)
        if l.shape != (self.k,):
            raise ValueError(f"loss has shape {l.shape}, expected ({self.k},)")
        self.t += 1
        self.acc += l
        self.count += 1
        changed = False
        for h, period in enumerate(self.periods):
            if self.t % period == 0:
                changed = True
                self.instances[h].update(self.acc[h] / self.count[h])
                self.acc[h] = 0.0
                self.count[h] = 0
                # no fresh instance once the horizon is reached: nothing is left to play
                if self.t % (period * self.branching) == 0 and self.t < self.horizon:
                    self.instances[h] = self.base()
        if changed:
            self.probs = self._mixture()
        return self.probs

    def copy(self) -> "TreeSwap":
        return copy.deepcopy(self)


def _step(state, loss):
    new = state.copy()
    probs = new.update(loss)
    return new, probs


def expweights_step(state: ExpWeights, loss) -> tuple[ExpWeights, np.ndarray]:
    return _step(state, loss)


def bm_step(state: BlumMansour, loss) -> tuple[BlumMansour, np.ndarray]:
    return _step(state, loss)


def treeswap_step(state: TreeSwap, loss) -> tuple[TreeSwap, np.ndarray]:
    return _step(state, loss)


def run_full_info(learner, losses) -> np.ndarray:
    """Feed each row of ``losses`` and stack the distributions emitted after each update."""
    return np.array([learner.update(l).copy() for l in np.asarray(losses, dtype=float)])
