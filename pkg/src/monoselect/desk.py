"""Exact enumeration of tiny selection games.

A tiny game has at most two agents, three rounds, two states, two outcomes
and five effort levels. Outcome randomness is a single uniform per round.
It is cut into cells whose boundaries are every cumulative outcome
probability any grid effort can produce, so within a cell the realised
outcome is fixed whatever the effort. A round's exogenous randomness is
then the triple ``(state, cell, published random number)`` and every
expectation is a finite sum.

Agent policies are dicts from ``(prefix, state, R)`` to a grid effort, where
``prefix`` is the tuple of earlier ``(state, cell, R)`` triples. The agent
never conditions on other agents' efforts, so the policies are
non-responsive by construction.
"""
from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from monoselect.contracting import OUTSIDE, LinearCost, OutcomeModel, QuadraticCost, check_cost
from monoselect.core import SeededRng

MAX_PATHS = 10**5
MAX_POLICIES = 2 * 10**5
SUITE_POLICIES = 5000


class DeskError(ValueError):
    """A tiny-game configuration or policy is unusable."""


@dataclass(frozen=True)
class ConstantRule:
    arm: int

    def __call__(self, history, r):
        return self.arm


@dataclass(frozen=True)
class TableRule:
    """Selection looked up by ``(history, R)``; missing keys fall back to ``default``."""

    table: tuple
    default: int = OUTSIDE

    def __call__(self, history, r):
        return dict(self.table).get((history, r), self.default)


@dataclass(frozen=True)
class StickOnSuccess:
    """Start with ``first``; keep the last agent after a return above ``threshold``, else switch.

    Raising the selected agent's return can only keep it selected, so the
    rule is monotone.
    """

    first: int
    k: int
    threshold: float = 0.0
    returns: tuple = (0.0, 1.0)

    def __call__(self, history, r):
        if not history:
            return self.first
        arm, o = history[-1]
        if arm == OUTSIDE:
            return self.first
        if self.returns[o] > self.threshold:
            return arm
        return (arm + 1) % self.k if self.k > 1 else OUTSIDE


@dataclass
class TinyGameSpec:
    model: OutcomeModel
    alpha: float
    costs: Sequence[Callable]
    horizon: int
    state_probs: np.ndarray
    grid: tuple
    mechanism: Callable = field(default_factory=lambda: ConstantRule(0))
    n_random: int = 1

    def __post_init__(self):
        self.state_probs = np.atleast_2d(np.asarray(self.state_probs, dtype=float))
        if self.state_probs.shape[0] == 1 and self.horizon > 1:
            self.state_probs = np.repeat(self.state_probs, self.horizon, axis=0)
        k, m, S = self.model.slopes.shape
        if k > 2 or m > 2 or S > 2 or self.horizon > 3 or len(self.grid) > 5:
            raise DeskError("tiny games allow k, m, states <= 2, T <= 3 and at most 5 efforts")
        if self.state_probs.shape != (self.horizon, S):
            raise DeskError(f"state_probs must be {self.horizon} x {S}")
        if len(self.costs) != k:
            raise DeskError("one cost per agent")
        for c in self.costs:
            check_cost(c)
        self.grid = tuple(float(a) for a in self.grid)
        self.payments = self.alpha * self.model.returns
        self.breaks = self._cell_breaks()
        if self.n_paths > MAX_PATHS:
            raise DeskError(f"{self.n_paths} restricted transcripts exceed {MAX_PATHS}")

    @property
    def k(self) -> int:
        return self.model.k

    @property
    def n_states(self) -> int:
        return self.model.n_states

    def _cell_breaks(self) -> np.ndarray:
        pts = {0.0, 1.0}
        for i in range(self.k):
            for y in range(self.n_states):
                for a in self.grid:
                    p = self.model.probs(i, a, y)[self.model.order]
                    pts.update(float(x) for x in np.cumsum(p)[:-1])
        b = np.array(sorted(x for x in pts if 0.0 <= x <= 1.0))
        return b[np.concatenate([[True], np.diff(b) > 1e-15])]

    @property
    def cell_widths(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def n_cells(self) -> int:
        return self.breaks.size - 1

    @property
    def n_paths(self) -> int:
        return (self.n_states * self.n_cells * self.n_random) ** self.horizon

    def outcome(self, i: int, a: float, y: int, cell: int) -> int:
        mid = 0.5 * (self.breaks[cell] + self.breaks[cell + 1])
        return self.model.draw(i, a, y, mid)

    def round_payoff(self, i: int, a: float, y: int) -> float:
        """Closed-form expected payment minus cost for one selected round."""
        return self.model.expected_value(i, a, y, self.payments) - float(self.costs[i](a))

    def keys(self, t: int):
        """Every ``(prefix, state, R)`` key of round ``t`` (0-based) with its probability."""
        triples = [(y, c, r) for y in range(self.n_states) for c in range(self.n_cells)
                   for r in range(self.n_random)]
        for prefix in itertools.product(triples, repeat=t):
            pr = 1.0
            for s, (y, c, r) in enumerate(prefix):
                pr *= self.state_probs[s, y] * self.cell_widths[c] / self.n_random
            for y in range(self.n_states):
                for r in range(self.n_random):
                    yield (prefix, y, r), pr * self.state_probs[t, y] / self.n_random

    def all_keys(self) -> list:
        return [key for t in range(self.horizon) for key, _ in self.keys(t)]


def _effort(policies, arm: int, key) -> float:
    try:
        return policies[arm][key]
    except KeyError:
        raise DeskError(f"agent {arm} has no effort for restricted prefix {key}") from None


def _node_value(spec: TinyGameSpec, policies, i: int, t: int, prefix: tuple, history: tuple) -> float:
    if t == spec.horizon:
        return 0.0
    total = 0.0
    for y in range(spec.n_states):
        py = spec.state_probs[t, y]
        if py == 0:
            continue
        for r in range(spec.n_random):
            total += py / spec.n_random * _branch_value(spec, policies, i, t, prefix, history, y, r)
    return total


def _branch_value(spec, policies, i, t, prefix, history, y, r) -> float:
    arm = spec.mechanism(history, r)
    now = 0.0
    a = None
    if arm != OUTSIDE:
        a = _effort(policies, arm, (prefix, y, r))
        if arm == i:
            now = spec.round_payoff(i, a, y)
    cont = 0.0
    for c, w in enumerate(spec.cell_widths):
        o = -1 if arm == OUTSIDE else spec.outcome(arm, a, y, c)
        cont += w * _node_value(spec, policies, i, t + 1, prefix + ((y, c, r),), history + ((arm, o),))
    return now + cont


def exact_utility(spec: TinyGameSpec, policies, i: int) -> float:
    """Agent ``i``'s exact expected total utility under ``policies``."""
    return _node_value(spec, policies, i, 0, (), ())


def _history_at(spec: TinyGameSpec, policies, prefix: tuple) -> tuple:
    history = ()
    for s, (y, c, r) in enumerate(prefix):
        arm = spec.mechanism(history, r)
        if arm == OUTSIDE:
            history += ((OUTSIDE, -1),)
        else:
            a = _effort(policies, arm, (prefix[:s], y, r))
            history += ((arm, spec.outcome(arm, a, y, c)),)
    return history


def key_probability(spec: TinyGameSpec, key) -> float:
    prefix, y, r = key
    pr = spec.state_probs[len(prefix), y] / spec.n_random
    for s, (ys, c, rs) in enumerate(prefix):
        pr *= spec.state_probs[s, ys] * spec.cell_widths[c] / spec.n_random
    return pr


def subgame_utility(spec: TinyGameSpec, policies, i: int, key) -> float:
    """Agent ``i``'s utility from the keyed round on, conditional on reaching it."""
    prefix, y, r = key
    history = _history_at(spec, policies, prefix)
    return _branch_value(spec, policies, i, len(prefix), prefix, history, y, r)


@dataclass(frozen=True)
class DecompositionCheck:
    delta_total: float
    probability: float
    delta_subgame: float

    @property
    def residual(self) -> float:
        return abs(self.delta_total - self.probability * self.delta_subgame)


def check_subgame_decomposition(spec: TinyGameSpec, policies, i: int, deviation: dict) -> DecompositionCheck:
    """Compare the total utility change of a one-key deviation with its subgame change.

    ``deviation`` maps exactly one key of agent ``i``'s policy to a new effort.
    """
    if len(deviation) != 1:
        raise DeskError("the decomposition identity is for a deviation at exactly one prefix")
    (key, effort), = deviation.items()
    new = [dict(p) for p in policies]
    new[i][key] = effort
    d_total = exact_utility(spec, new, i) - exact_utility(spec, policies, i)
    d_sub = subgame_utility(spec, new, i, key) - subgame_utility(spec, policies, i, key)
    return DecompositionCheck(d_total, key_probability(spec, key), d_sub)


def myopic_grid_effort(spec: TinyGameSpec, i: int, y: int) -> float:
    """Smallest grid effort maximising one round's expected payment minus cost."""
    vals = np.array([spec.round_payoff(i, a, y) for a in spec.grid])
    return spec.grid[int(np.flatnonzero(vals >= vals.max() - 1e-12)[0])]


def myopic_policy(spec: TinyGameSpec, i: int) -> dict:
    return {key: myopic_grid_effort(spec, i, key[1]) for key in spec.all_keys()}


def myopic_profile(spec: TinyGameSpec) -> list:
    return [myopic_policy(spec, i) for i in range(spec.k)]


@dataclass(frozen=True)
class MyopicVerdict:
    myopic_value: float
    best_value: float
    n_policies: int

    @property
    def holds(self) -> bool:
        return bool(self.best_value <= self.myopic_value + 1e-12)


def check_myopic_under_constant(spec: TinyGameSpec, i: int) -> MyopicVerdict:
    """Enumerate every grid policy of agent ``i`` under constant selection of ``i``."""
    if not (isinstance(spec.mechanism, ConstantRule) and spec.mechanism.arm == i):
        raise DeskError("myopic optimality is checked under constant selection of the same agent")
    keys = spec.all_keys()
    n = len(spec.grid) ** len(keys)
    if n > MAX_POLICIES:
        raise DeskError(f"{n} grid policies exceed {MAX_POLICIES}")
    profile = myopic_profile(spec)
    base = exact_utility(spec, profile, i)
    best = -math.inf
    for efforts in itertools.product(spec.grid, repeat=len(keys)):
        profile[i] = dict(zip(keys, efforts))
        best = max(best, exact_utility(spec, profile, i))
    return MyopicVerdict(base, best, n)


def best_response_value(spec: TinyGameSpec, policies, i: int, first_effort: Optional[float] = None) -> float:
    """Agent ``i``'s best attainable utility against fixed ``policies`` of the others.

    Backward induction over the agent's own decision points; each restricted
    prefix determines the principal transcript, so choosing per node is a
    valid policy. ``first_effort`` pins every round-1 effort of agent ``i``.
    """
    def node(t, prefix, history):
        if t == spec.horizon:
            return 0.0
        total = 0.0
        for y in range(spec.n_states):
            for r in range(spec.n_random):
                pr = spec.state_probs[t, y] / spec.n_random
                if pr == 0:
                    continue
                arm = spec.mechanism(history, r)
                if arm == i:
                    choices = [first_effort] if (t == 0 and first_effort is not None) else spec.grid
                else:
                    choices = [None]
                best = -math.inf
                for a in choices:
                    if arm == OUTSIDE:
                        eff = None
                    elif arm == i:
                        eff = a
                    else:
                        eff = _effort(policies, arm, (prefix, y, r))
                    now = spec.round_payoff(i, eff, y) if arm == i else 0.0
                    cont = 0.0
                    for c, w in enumerate(spec.cell_widths):
                        o = -1 if arm == OUTSIDE else spec.outcome(arm, eff, y, c)
                        cont += w * node(t + 1, prefix + ((y, c, r),), history + ((arm, o),))
                    best = max(best, now + cont)
                total += pr * best
        return total

    return node(0, (), ())


@dataclass(frozen=True)
class IncentiveCheck:
    myopic_effort: float
    values: tuple  # best attainable utility for each pinned round-1 grid effort
    grid: tuple

    @property
    def best(self) -> float:
        return max(self.values)

    @property
    def holds(self) -> bool:
        """No round-1 effort below the myopic one is a best response."""
        return all(v < self.best - 1e-12 for a, v in zip(self.grid, self.values) if a < self.myopic_effort)


def check_effort_not_below_myopic(spec: TinyGameSpec, i: int, policies=None) -> IncentiveCheck:
    """Grid-level necessary condition: round-1 best responses are at least myopic.

    Needs ``i`` selected in round 1 under every state and published number,
    and a single state in round 1.
    """
    if spec.n_states != 1:
        raise DeskError("the round-1 incentive check expects a single state")
    if any(spec.mechanism((), r) != i for r in range(spec.n_random)):
        raise DeskError("agent must be selected in round 1")
    policies = policies if policies is not None else myopic_profile(spec)
    vals = tuple(float(best_response_value(spec, policies, i, first_effort=a)) for a in spec.grid)
    return IncentiveCheck(myopic_grid_effort(spec, i, 0), vals, spec.grid)


def mc_utility(spec: TinyGameSpec, policies, i: int, n: int = 10**6, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of agent ``i``'s utility and its standard error.

    Outcomes are drawn from the sampled uniform directly, independent of the
    cell closed form; cells are used only to look up the policy keys.
    """
    gen = SeededRng(seed, "desk/mc").generator
    T, S, R = spec.horizon, spec.n_states, spec.n_random
    model = spec.model
    payoff = np.zeros(n)
    nodes = [((), ())]
    node = np.zeros(n, dtype=np.int64)
    for t in range(T):
        cdf = np.cumsum(spec.state_probs[t])
        y = np.minimum(np.searchsorted(cdf, gen.random(n), side="right"), S - 1)
        u = gen.random(n)
        r = gen.integers(0, R, size=n)
        cell = np.clip(np.searchsorted(spec.breaks, u, side="right") - 1, 0, spec.n_cells - 1)
        combo = (node * S + y) * R + r
        uniq, inv = np.unique(combo, return_inverse=True)
        outcome = np.full(n, -1)
        arms = np.empty(uniq.size, dtype=int)
        for j, cmb in enumerate(uniq):
            nd, rest = divmod(int(cmb), S * R)
            yy, rr = divmod(rest, R)
            prefix, history = nodes[nd]
            arm = spec.mechanism(history, rr)
            arms[j] = arm
            if arm == OUTSIDE:
                continue
            a = _effort(policies, arm, (prefix, yy, rr))
            mask = inv == j
            p = model.probs(arm, a, yy)[model.order]
            idx = np.minimum(np.searchsorted(np.cumsum(p), u[mask], side="right"), model.m - 1)
            o = model.order[idx]
            outcome[mask] = o
            if arm == i:
                payoff[mask] += spec.payments[o] - float(spec.costs[i](a))
        nxt = inv.astype(np.int64) * spec.n_cells + cell
        uniq2, inv2 = np.unique(nxt, return_inverse=True)
        first = np.zeros(uniq2.size, dtype=np.int64)
        first[inv2[::-1]] = np.arange(n)[::-1]
        new_nodes = []
        for j, code in enumerate(uniq2):
            cj, c = divmod(int(code), spec.n_cells)
            nd, rest = divmod(int(uniq[cj]), S * R)
            yy, rr = divmod(rest, R)
            prefix, history = nodes[nd]
            s = first[j]
            new_nodes.append((prefix + ((yy, c, rr),), history + ((int(arms[cj]), int(outcome[s])),)))
        nodes = new_nodes
        node = inv2.astype(np.int64)
    return float(payoff.mean()), float(payoff.std(ddof=1) / math.sqrt(n))


def random_tiny_spec(seed: int, constant: Optional[int] = None, horizon: Optional[int] = None,
                     enumerable: bool = False) -> TinyGameSpec:
    """A random tiny game; ``constant`` fixes selection of that agent every round.

    ``enumerable`` redraws until one agent has at most ``SUITE_POLICIES`` grid
    policies, which keeps exhaustive checks quick.
    """
    gen = SeededRng(seed, "desk/spec").generator
    while True:
        k = int(gen.integers(1, 3))
        S = int(gen.integers(1, 3))
        T = horizon or int(gen.integers(1, 4))
        g = int(gen.integers(2, 6))
        n_random = int(gen.integers(1, 3))
        lo = float(gen.uniform(-1, 0.5))
        returns = np.array([lo, float(gen.uniform(lo, 1))])
        slopes = np.zeros((k, 2, S))
        inter = np.zeros((k, 2, S))
        for i in range(k):
            for y in range(S):
                base = float(gen.uniform(0, 0.6))
                gain = float(gen.uniform(0, 1 - base))
                slopes[i, :, y] = [-gain, gain]
                inter[i, :, y] = [1 - base, base]
        model = OutcomeModel(returns, slopes, inter)
        costs = [_random_cost(gen) for _ in range(k)]
        probs = gen.dirichlet(np.ones(S), size=T)
        grid = tuple(np.round(np.linspace(0, 1, g), 6))
        if constant is not None:
            mech = ConstantRule(min(constant, k - 1))
        else:
            mech = HashRule(int(gen.integers(0, 2**31)), k)
        try:
            spec = TinyGameSpec(model, float(gen.uniform(0.1, 0.9)), costs, T, probs, grid, mech, n_random)
        except DeskError:
            continue
        if enumerable and len(spec.grid) ** len(spec.all_keys()) > SUITE_POLICIES:
            continue
        return spec


def _random_cost(gen):
    if gen.random() < 0.5:
        return QuadraticCost(float(gen.uniform(0.05, 1.0)))
    return LinearCost(float(gen.uniform(0.0, 0.5)))


@dataclass(frozen=True)
class HashRule:
    """Arbitrary but fixed selection: a checksum of ``(salt, history, R)`` picks the arm."""

    salt: int
    k: int

    def __call__(self, history, r):
        h = zlib.crc32(repr((self.salt, history, r)).encode())
        return (h % (self.k + 1)) - 1


def random_policy_profile(spec: TinyGameSpec, seed: int) -> list:
    gen = SeededRng(seed, "desk/policy").generator
    keys = spec.all_keys()
    return [{key: spec.grid[int(gen.integers(len(spec.grid)))] for key in keys} for _ in range(spec.k)]


def incentive_spec(seed: int) -> TinyGameSpec:
    """Two rounds, one state, agent 0 picked first and kept only after a success."""
    gen = SeededRng(seed, "desk/incentive").generator
    success = [(float(gen.uniform(0.05, 0.5)), float(gen.uniform(0.2, 0.5))) for _ in range(2)]
    model = OutcomeModel.binary(success)
    costs = [QuadraticCost(float(gen.uniform(0.1, 0.6))) for _ in range(2)]
    return TinyGameSpec(model, float(gen.uniform(0.2, 0.8)), costs, 2, [[1.0]],
                        (0.0, 0.25, 0.5, 0.75, 1.0), StickOnSuccess(0, 2))
