"""Repeated principal-agent selection games.

Each round the principal picks one of ``k`` agents or the outside option,
the picked agent chooses an effort, and an outcome is drawn from a
distribution that is affine in that effort. Game 1 pays the contract every
round. Game 2 defers payments to a per-agent tab and pays ``max(0, tab)``
at the end.

Outcome draws use one uniform per agent per round and inverse-CDF lookup
over outcomes in decreasing order of return. For two outcomes this makes
realised returns pointwise non-decreasing in effort under a shared seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from monoselect.core import SeededRng, categorical

OUTSIDE = -1


# -- outcome model ------------------------------------------------------------

@dataclass
class OutcomeModel:
    """``p[i, o](a, y) = slopes[i, o, y] * a + intercepts[i, o, y]``."""

    returns: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        self.slopes = np.asarray(self.slopes, dtype=float)
        self.intercepts = np.asarray(self.intercepts, dtype=float)
        if self.slopes.ndim != 3 or self.slopes.shape != self.intercepts.shape:
            raise ValueError("slopes and intercepts must both be k x m x n_states")
        if self.slopes.shape[1] != self.returns.size:
            raise ValueError("outcome count disagrees with the returns vector")
        if np.any(np.abs(self.returns) > 1):
            raise ValueError("returns must lie in [-1, 1]")
        for a in (0.0, 1.0):
            p = self.slopes * a + self.intercepts
            if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
                raise ValueError(f"outcome probabilities leave [0, 1] at effort {a}")
            if np.any(np.abs(p.sum(axis=1) - 1) > 1e-12):
                raise ValueError(f"outcome probabilities do not sum to 1 at effort {a}")
        if np.any(self.return_slopes() < -1e-12):
            raise ValueError("expected return must be non-decreasing in effort")
        # sampling order: outcomes by decreasing return, stable on ties
        self.order = np.argsort(-self.returns, kind="stable")

    @property
    def k(self) -> int:
        return self.slopes.shape[0]

    @property
    def m(self) -> int:
        return self.returns.size

    @property
    def n_states(self) -> int:
        return self.slopes.shape[2]

    def probs(self, i: int, a: float, y: int) -> np.ndarray:
        p = self.slopes[i, :, y] * a + self.intercepts[i, :, y]
        return np.clip(p, 0.0, 1.0)

    def return_slopes(self) -> np.ndarray:
        """``sum_o slopes[i, o, y] * r(o)`` as a k x n_states array."""
        return np.einsum("ioy,o->iy", self.slopes, self.returns)

    def expected_return(self, i: int, a: float, y: int) -> float:
        return float(self.probs(i, a, y) @ self.returns)

    def expected_value(self, i: int, a: float, y: int, values) -> float:
        """Expectation of any per-outcome quantity, e.g. payments ``v(r(o))``."""
        return float(self.probs(i, a, y) @ np.asarray(values, dtype=float))

    def draw(self, i: int, a: float, y: int, u: float) -> int:
        p = self.probs(i, a, y)[self.order]
        return int(self.order[categorical(p, u)])

    @classmethod
    def binary(cls, success: Sequence[tuple[float, float]], low: float = 0.0, high: float = 1.0) -> "OutcomeModel":
        """Two outcomes and one state; agent ``i`` succeeds w.p. ``base + gain * a``."""
        k = len(success)
        slopes = np.zeros((k, 2, 1))
        intercepts = np.zeros((k, 2, 1))
        for i, (base, gain) in enumerate(success):
            slopes[i, :, 0] = [-gain, gain]
            intercepts[i, :, 0] = [1 - base, base]
        return cls(np.array([low, high]), slopes, intercepts)


# -- contracts ----------------------------------------------------------------

@dataclass(frozen=True)
class Linear:
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    def pay(self, r):
        return self.alpha * np.asarray(r, dtype=float) if np.ndim(r) else self.alpha * float(r)


@dataclass(frozen=True)
class PiecewiseConcave:
    """Concave non-decreasing payment through ``(xs[j], values[j])``, linear in between."""

    xs: tuple
    values: tuple

    def __post_init__(self):
        x = np.asarray(self.xs, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.size < 2 or x.size != v.size or np.any(np.diff(x) <= 0):
            raise ValueError("need at least two strictly increasing breakpoints")
        if x[0] > -1 or x[-1] < 1:
            raise ValueError("breakpoints must cover [-1, 1]")
        slopes = np.diff(v) / np.diff(x)
        if np.any(slopes < -1e-12):
            raise ValueError("contract must be non-decreasing")
        if np.any(np.diff(slopes) > 1e-12):
            raise ValueError("contract slopes must be non-increasing")

    def pay(self, r):
        out = np.interp(r, self.xs, self.values)
        return out if np.ndim(r) else float(out)


Contract = Union[Linear, PiecewiseConcave]


# -- costs and agents ---------------------------------------------------------

@dataclass(frozen=True)
class LinearCost:
    c: float

    def __call__(self, a):
        return self.c * a


@dataclass(frozen=True)
class QuadraticCost:
    gamma: float

    def __call__(self, a):
        return self.gamma * a * a


@dataclass(frozen=True)
class TableCost:
    """Piecewise-linear cost through ``(efforts[j], values[j])``."""

    efforts: tuple
    values: tuple

    def __post_init__(self):
        e = np.asarray(self.efforts, dtype=float)
        if e[0] != 0.0 or e[-1] != 1.0 or np.any(np.diff(e) <= 0):
            raise ValueError("cost table efforts must run strictly from 0 to 1")

    def __call__(self, a):
        return float(np.interp(a, self.efforts, self.values))


def check_cost(cost: Callable, n: int = 101) -> None:
    grid = np.linspace(0.0, 1.0, n)
    c = np.array([cost(a) for a in grid])
    if c[0] < 0:
        raise ValueError("cost(0) must be non-negative")
    if np.any(np.diff(c) < -1e-12):
        raise ValueError("cost must be non-decreasing")
    if np.any(np.diff(c, 2) < -1e-12):
        raise ValueError("cost must be convex")


@dataclass(frozen=True)
class Myopic:
    pass


@dataclass(frozen=True)
class Boosted:
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("boost must be non-negative")


@dataclass(frozen=True)
class Fixed:
    effort: float


@dataclass
class AgentSpec:
    """Cost plus belief about states; ``belief=None`` means the true sequence is known."""

    cost: Callable
    policy: Union[Myopic, Boosted, Fixed] = field(default_factory=Myopic)
    belief: Optional[np.ndarray] = None

    def __post_init__(self):
        check_cost(self.cost)
        if self.belief is not None:
            self.belief = np.asarray(self.belief, dtype=float)


def payment_values(model: OutcomeModel, contract) -> np.ndarray:
    return np.array([contract.pay(r) for r in model.returns])


def _maximize_concave(f: Callable[[float], float], tol: float = 1e-12) -> float:
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) < f(m2):
            lo = m1
        else:
            hi = m2
    a = 0.5 * (lo + hi)
    if f(0.0) >= f(a) - tol:
        return 0.0
    if f(1.0) > f(a):
        return 1.0
    return a


def myopic_action(agent: AgentSpec, model: OutcomeModel, contract, i: int, state_dist) -> float:
    """Smallest effort maximising expected payment minus cost for one round.

    Expected payment is affine in effort for any contract, because the
    outcome probabilities are; its slope is averaged over ``state_dist``.
    """
    q = np.asarray(state_dist, dtype=float)
    v = payment_values(model, contract)
    slope = float(np.einsum("oy,o,y->", model.slopes[i], v, q))
    cost = agent.cost
    if isinstance(cost, LinearCost):
        return 1.0 if slope > cost.c else 0.0
    if isinstance(cost, QuadraticCost):
        if cost.gamma == 0:
            return 1.0 if slope > 0 else 0.0
        return float(min(1.0, max(0.0, slope / (2.0 * cost.gamma))))
    if isinstance(cost, TableCost):
        # piecewise-linear objective: an optimum sits on a breakpoint
        e = np.asarray(cost.efforts, dtype=float)
        obj = slope * e - np.asarray(cost.values, dtype=float)
        return float(e[np.flatnonzero(obj >= obj.max() - 1e-12)[0]])
    return _maximize_concave(lambda a: slope * a - cost(a))


def agent_effort(agent: AgentSpec, model: OutcomeModel, contract, i: int, state_dist) -> float:
    pol = agent.policy
    if isinstance(pol, Fixed):
        return float(pol.effort)
    a = myopic_action(agent, model, contract, i, state_dist)
    if isinstance(pol, Boosted):
        return min(1.0, a + pol.delta)
    return a


# -- principal side -----------------------------------------------------------

@dataclass
class PrincipalTranscript:
    """What the principal sees: its selections and the realised returns."""

    selected: list = field(default_factory=list)
    returns: list = field(default_factory=list)

    def append(self, arm: int, r: float) -> None:
        self.selected.append(int(arm))
        self.returns.append(float(r))

    def __len__(self) -> int:
        return len(self.selected)


def utility_to_loss(u: float) -> float:
    return (1.0 - u) / 2.0


class ConstantMechanism:
    """Always selects the same agent (or the outside option)."""

    draws: tuple = ()

    def __init__(self, k: int, arm: int):
        self.k = k
        self.arm = arm

    def select(self, history: PrincipalTranscript) -> tuple[int, Optional[bool]]:
        return self.arm, None

    def observe(self, history: PrincipalTranscript, utility: float) -> None:
        pass


class LearnerMechanism:
    """Bandit selection over ``k + 1`` arms; arm ``k`` is the outside option.

    The learner is fed ``(1 - u) / 2`` where ``u`` is the principal's utility
    for the round, so the outside option always costs 0.5.
    """

    def __init__(self, k: int, learner):
        if learner.k != k + 1:
            raise ValueError("learner needs one arm per agent plus the outside option")
        self.k = k
        self.learner = learner
        self._pending = None
        self.draws: tuple = ()

    def select(self, history: PrincipalTranscript) -> tuple[int, Optional[bool]]:
        # identifiers of the published randomness, for the transcript
        self.draws = (self.learner.rng_b.next_id(), self.learner.rng_f.next_id())
        arm, explore = self.learner.select()
        self._pending = (arm, explore)
        return (OUTSIDE if arm == self.k else arm), explore

    def observe(self, history: PrincipalTranscript, utility: float) -> None:
        arm, explore = self._pending
        self.learner.observe(arm, explore, utility_to_loss(utility))
        self._pending = None

    @property
    def probs(self) -> np.ndarray:
        return self.learner.probs


@dataclass
class GameRow:
    round: int
    selected: int
    explore: Optional[bool]
    effort: float
    state: int
    outcome: int
    ret: float
    payment: float
    principal_utility: float
    agent_utility: float
    tab: float
    # evaluation only: every agent's effort and return this round
    efforts: tuple = ()
    counterfactual_returns: tuple = ()
    draws: tuple = ()


@dataclass
class TabLedger:
    tabs: np.ndarray
    lowest: np.ndarray

    @classmethod
    def zeros(cls, k: int) -> "TabLedger":
        return cls(np.zeros(k), np.zeros(k))

    def accrue(self, i: int, amount: float) -> float:
        self.tabs[i] += amount
        self.lowest[i] = min(self.lowest[i], self.tabs[i])
        return float(self.tabs[i])

    @property
    def payouts(self) -> np.ndarray:
        return np.maximum(0.0, self.tabs)


@dataclass
class GameTranscript:
    rows: list
    k: int
    alpha: Optional[float]
    limited_liability: bool
    paid: np.ndarray
    costs: np.ndarray
    ledger: Optional[TabLedger] = None

    @property
    def payouts(self) -> np.ndarray:
        """Total paid to each agent: running payments in Game 1, clamped tabs in Game 2."""
        return self.ledger.payouts if self.limited_liability else self.paid

    @property
    def agent_totals(self) -> np.ndarray:
        return self.payouts - self.costs

    @property
    def principal_total(self) -> float:
        return float(sum(r.ret for r in self.rows if r.selected != OUTSIDE) - self.payouts.sum())

    @property
    def selections(self) -> np.ndarray:
        return np.array([r.selected for r in self.rows], dtype=int)

    @property
    def tab_never_negative(self) -> bool:
        return self.ledger is not None and bool(np.all(self.ledger.lowest >= 0))


def state_sequence(horizon: int, probs, seed: int) -> np.ndarray:
    """i.i.d. states from ``probs`` on their own stream."""
    rng = SeededRng(seed, "states")
    p = np.asarray(probs, dtype=float)
    return np.array([categorical(p, u) for u in rng.uniforms(horizon)], dtype=int)


def _belief(agent: AgentSpec, y: int, n_states: int) -> np.ndarray:
    if agent.belief is not None:
        return agent.belief
    q = np.zeros(n_states)
    q[y] = 1.0
    return q


def play_game(mechanism, agents: Sequence[AgentSpec], model: OutcomeModel, contract, states,
              seed: int = 0, limited_liability: bool = False) -> GameTranscript:
    """Run one game; ``limited_liability`` switches from Game 1 to Game 2."""
    k = len(agents)
    states = np.asarray(states, dtype=int)
    if model.k != k:
        raise ValueError(f"outcome model has {model.k} agents, config has {k}")
    if states.size and (states.min() < 0 or states.max() >= model.n_states):
        raise ValueError("state sequence uses states outside the model's alphabet")
    if limited_liability and not isinstance(contract, Linear):
        raise ValueError("the tab game needs a linear contract")
    outcome_rng = SeededRng(seed, "outcomes")
    history = PrincipalTranscript()
    ledger = TabLedger.zeros(k) if limited_liability else None
    paid = np.zeros(k)
    costs = np.zeros(k)
    rows = []
    effort_cache: dict = {}
    for t, y in enumerate(states):
        arm, explore = mechanism.select(history)
        us = outcome_rng.uniforms(k)
        efforts, rets, outs = [], [], []
        for j, ag in enumerate(agents):
            key = (j, int(y) if ag.belief is None else -1)
            if key not in effort_cache:
                effort_cache[key] = agent_effort(ag, model, contract, j, _belief(ag, y, model.n_states))
            a = effort_cache[key]
            o = model.draw(j, a, y, us[j])
            efforts.append(a)
            outs.append(o)
            rets.append(float(model.returns[o]))
        if arm == OUTSIDE:
            r = pay = u_p = u_a = 0.0
            a, o, tab = 0.0, -1, float("nan")
        else:
            a, o, r = efforts[arm], outs[arm], rets[arm]
            pay = float(contract.pay(r))
            u_p = r - pay
            c = float(agents[arm].cost(a))
            costs[arm] += c
            paid[arm] += pay
            tab = ledger.accrue(arm, pay) if ledger is not None else float("nan")
            u_a = (0.0 if ledger is not None else pay) - c
        history.append(arm, r)
        mechanism.observe(history, u_p)
        rows.append(GameRow(t + 1, arm, explore, a, int(y), o, r, pay, u_p, u_a, tab,
                            tuple(efforts), tuple(rets), tuple(getattr(mechanism, "draws", ()))))
    alpha = contract.alpha if isinstance(contract, Linear) else None
    return GameTranscript(rows, k, alpha, limited_liability, paid, costs, ledger)


def play_game1(mechanism, agents, model, contract, states, seed: int = 0) -> GameTranscript:
    return play_game(mechanism, agents, model, contract, states, seed, limited_liability=False)


def play_game2(mechanism, agents, model, contract, states, seed: int = 0) -> GameTranscript:
    return play_game(mechanism, agents, model, contract, states, seed, limited_liability=True)


# -- evaluation ---------------------------------------------------------------

def expected_principal_utility(model: OutcomeModel, contract, i: int, a: float, y: int) -> float:
    v = payment_values(model, contract)
    return model.expected_value(i, a, y, model.returns - v)


def benchmark_utilities(model: OutcomeModel, contract, agents, states) -> np.ndarray:
    """Expected principal utility of always selecting agent ``i`` who then plays myopically."""
    states = np.asarray(states, dtype=int)
    out = np.zeros(len(agents))
    for i, ag in enumerate(agents):
        bench = AgentSpec(ag.cost, Myopic(), ag.belief)
        per_state = {}
        for y in np.unique(states):
            a = myopic_action(bench, model, contract, i, _belief(bench, y, model.n_states))
            per_state[int(y)] = expected_principal_utility(model, contract, i, a, int(y))
        out[i] = sum(per_state[int(y)] for y in states)
    return out


def policy_regret(transcript: GameTranscript, model: OutcomeModel, contract, agents, states,
                  expected: bool = False) -> float:
    """Best constant-selection benchmark minus the principal's utility.

    With ``expected=True`` the realised utility of each round is replaced by
    its expectation given the selected agent, effort and state, which removes
    outcome noise but keeps the mechanism's own randomness.
    """
    bench = benchmark_utilities(model, contract, agents, states).max()
    if expected:
        got = sum(expected_principal_utility(model, contract, row.selected, row.effort, row.state)
                  for row in transcript.rows if row.selected != OUTSIDE)
    else:
        got = sum(row.principal_utility for row in transcript.rows)
    return float(bench - got)


def liability_bound(alpha: float, horizon: int, n_arms: int, inner_bound: float) -> float:
    """Lower bound ``-alpha * 2 sqrt(n_arms * T * R(T))`` on an agent's mean raw tab."""
    return -alpha * 2.0 * math.sqrt(n_arms * horizon * inner_bound)
