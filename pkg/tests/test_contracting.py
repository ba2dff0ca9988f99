from __future__ import annotations

import numpy as np
import pytest

from monoselect.bench import make_learner
from monoselect.contracting import (OUTSIDE, AgentSpec, Boosted, ConstantMechanism, Fixed, Linear, LinearCost,
                                    LearnerMechanism, OutcomeModel, PiecewiseConcave, PrincipalTranscript,
                                    QuadraticCost, TableCost, agent_effort, benchmark_utilities, check_cost,
                                    liability_bound, myopic_action, play_game1, play_game2, policy_regret,
                                    state_sequence, utility_to_loss)
from monoselect.regret import bound_mono_bandit_mw


def coin(a_gain=1.0):
    """One agent, returns {0, 1}, success probability a * a_gain."""
    return OutcomeModel.binary([(0.0, a_gain)])


def test_model_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        OutcomeModel.binary([(0.5, 0.7)])
    with pytest.raises(ValueError):
        OutcomeModel(np.array([0.0, 1.0]), np.zeros((1, 2, 1)), np.full((1, 2, 1), 0.4))


def test_model_rejects_decreasing_return():
    with pytest.raises(ValueError):
        OutcomeModel.binary([(0.8, -0.3)])


def test_model_rejects_returns_outside_unit_interval():
    with pytest.raises(ValueError):
        OutcomeModel.binary([(0.1, 0.5)], low=-2.0)


def test_expected_return_monotone_on_grid():
    model = OutcomeModel.binary([(0.2, 0.3), (0.1, 0.6)], low=-0.2, high=1.0)
    for i in range(2):
        r = [model.expected_return(i, a, 0) for a in np.linspace(0, 1, 101)]
        assert np.all(np.diff(r) >= -1e-15)


def test_draw_is_monotone_coupling():
    model = OutcomeModel.binary([(0.1, 0.8)], low=-0.5, high=1.0)
    us = np.random.default_rng(0).random(500)
    lo = np.array([model.returns[model.draw(0, 0.2, 0, u)] for u in us])
    hi = np.array([model.returns[model.draw(0, 0.7, 0, u)] for u in us])
    assert np.all(hi >= lo)


def test_contract_validation():
    with pytest.raises(ValueError):
        Linear(1.5)
    with pytest.raises(ValueError):
        PiecewiseConcave((-1.0, 0.0, 1.0), (0.0, 0.1, 0.6))  # convex kink
    pc = PiecewiseConcave((-1.0, 0.0, 1.0), (-0.4, 0.0, 0.2))
    assert pc.pay(0.5) == pytest.approx(0.1)


def test_cost_validation():
    check_cost(QuadraticCost(0.3))
    with pytest.raises(ValueError):
        check_cost(lambda a: -a)
    with pytest.raises(ValueError):
        AgentSpec(lambda a: np.sqrt(a))


@pytest.mark.parametrize("c,expected", [(0.4, 1.0), (0.6, 0.0), (0.5, 0.0)])
def test_myopic_linear_cost_endpoints(c, expected):
    # slope of expected payment is alpha * 1 = 0.5; ties go to zero effort
    assert myopic_action(AgentSpec(LinearCost(c)), coin(), Linear(0.5), 0, [1.0]) == expected


def test_myopic_quadratic_interior_matches_grid_search():
    agent = AgentSpec(QuadraticCost(0.5))
    a = myopic_action(agent, coin(), Linear(0.6), 0, [1.0])
    assert a == pytest.approx(0.6)
    grid = np.linspace(0, 1, 1_000_001)
    best = grid[np.argmax(0.6 * grid - 0.5 * grid ** 2)]
    assert abs(a - best) < 1e-6


def test_myopic_zero_share_means_zero_effort():
    assert myopic_action(AgentSpec(QuadraticCost(0.1)), coin(), Linear(0.0), 0, [1.0]) == 0.0


def test_myopic_table_and_generic_costs_agree_with_grid():
    table = TableCost((0.0, 0.25, 0.5, 1.0), (0.0, 0.02, 0.1, 0.6))
    a = myopic_action(AgentSpec(table), coin(), Linear(0.4), 0, [1.0])
    assert a == 0.5  # objective 0, 0.08, 0.1, -0.2 at the breakpoints
    generic = AgentSpec(lambda x: 0.3 * x ** 3)
    a = myopic_action(generic, coin(), Linear(0.45), 0, [1.0])
    assert a == pytest.approx(np.sqrt(0.45 / 0.9), abs=1e-6)


def test_myopic_averages_over_belief():
    slopes = np.zeros((1, 2, 2))
    slopes[0, :, 0] = [-1.0, 1.0]  # effort helps only in state 0
    intercepts = np.zeros((1, 2, 2))
    intercepts[0, 0, :] = 1.0
    model = OutcomeModel(np.array([0.0, 1.0]), slopes, intercepts)
    agent = AgentSpec(QuadraticCost(1.0), belief=[0.5, 0.5])
    assert myopic_action(agent, model, Linear(1.0), 0, agent.belief) == pytest.approx(0.25)


def test_boosted_policy_edges():
    model, contract = coin(), Linear(0.6)
    base = myopic_action(AgentSpec(QuadraticCost(0.5)), model, contract, 0, [1.0])
    assert agent_effort(AgentSpec(QuadraticCost(0.5), Boosted(0.0)), model, contract, 0, [1.0]) == base
    assert agent_effort(AgentSpec(QuadraticCost(0.5), Boosted(1.0)), model, contract, 0, [1.0]) == 1.0
    assert agent_effort(AgentSpec(QuadraticCost(0.5), Fixed(0.3)), model, contract, 0, [1.0]) == 0.3


def test_constant_mechanism_agent_plays_myopic():
    model = OutcomeModel.binary([(0.2, 0.5), (0.1, 0.7)])
    agents = [AgentSpec(QuadraticCost(0.4)), AgentSpec(QuadraticCost(0.3))]
    tr = play_game1(ConstantMechanism(2, 1), agents, model, Linear(0.4), np.zeros(50, dtype=int), seed=2)
    want = myopic_action(agents[1], model, Linear(0.4), 1, [1.0])
    assert all(row.effort == want and row.selected == 1 for row in tr.rows)


class Recorder:
    """Wraps a mechanism and logs everything it is shown."""

    def __init__(self, inner):
        self.inner = inner
        self.seen = []

    def select(self, history):
        assert isinstance(history, PrincipalTranscript)
        self.seen.append(("select", tuple(history.selected), tuple(history.returns)))
        return self.inner.select(history)

    def observe(self, history, utility):
        assert isinstance(utility, float)
        self.seen.append(("observe", utility))
        self.inner.observe(history, utility)


def test_mechanism_blind_to_unselected_agents():
    # agent 1's effort has no effect on its own returns, so changing it can
    # only leak through a channel the mechanism must not have
    model = OutcomeModel.binary([(0.2, 0.6), (0.5, 0.0)])
    states = np.zeros(300, dtype=int)
    logs = []
    for effort in (0.0, 0.9):
        agents = [AgentSpec(QuadraticCost(0.3)), AgentSpec(QuadraticCost(0.3), Fixed(effort))]
        mech = Recorder(LearnerMechanism(2, make_learner("monobandit-expweights", 3, 300, seed=5)))
        tr = play_game1(mech, agents, model, Linear(0.3), states, seed=5)
        logs.append(mech.seen)
        assert {row.efforts[1] for row in tr.rows} == {effort}
    assert logs[0] == logs[1]


def test_outside_option_rows():
    model = coin()
    tr = play_game2(ConstantMechanism(1, OUTSIDE), [AgentSpec(QuadraticCost(0.2))], model, Linear(0.5),
                    np.zeros(20, dtype=int), seed=0)
    assert all(r.principal_utility == 0.0 and r.payment == 0.0 for r in tr.rows)
    assert tr.ledger.tabs[0] == 0.0 and tr.principal_total == 0.0


def test_learner_mechanism_maps_outside_arm():
    mech = LearnerMechanism(2, make_learner("monobandit-expweights", 3, 10))
    with pytest.raises(ValueError):
        LearnerMechanism(3, make_learner("monobandit-expweights", 3, 10))
    assert utility_to_loss(0.0) == 0.5 and utility_to_loss(1.0) == 0.0 and utility_to_loss(-1.0) == 1.0
    assert mech.probs.shape == (3,)


def test_tab_equals_alpha_times_returns_bitwise():
    model = OutcomeModel.binary([(0.3, 0.4), (0.2, 0.5)])
    agents = [AgentSpec(QuadraticCost(0.4)), AgentSpec(QuadraticCost(0.2))]
    alpha = 0.375  # exact in binary so the running sum is exact
    mech = LearnerMechanism(2, make_learner("monobandit-treeswap", 3, 400, seed=3))
    tr = play_game2(mech, agents, model, Linear(alpha), np.zeros(400, dtype=int), seed=3)
    for i in range(2):
        total = sum(r.ret for r in tr.rows if r.selected == i)
        assert tr.ledger.tabs[i] == alpha * total


def test_tab_forgives_debt():
    model = OutcomeModel.binary([(0.0, 0.0)], low=-0.5, high=-0.1)
    tr = play_game2(ConstantMechanism(1, 0), [AgentSpec(QuadraticCost(0.1))], model, Linear(0.5),
                    np.zeros(30, dtype=int), seed=1)
    assert tr.ledger.tabs[0] == pytest.approx(-7.5)
    assert tr.payouts[0] == 0.0 and not tr.tab_never_negative
    assert tr.principal_total == pytest.approx(-15.0)


def test_game1_pays_every_round():
    model = coin()
    tr = play_game1(ConstantMechanism(1, 0), [AgentSpec(LinearCost(0.0))], model, Linear(0.25),
                    np.zeros(40, dtype=int), seed=0)
    assert all(r.ret == 1.0 and r.payment == 0.25 and r.agent_utility == 0.25 for r in tr.rows)
    assert tr.payouts[0] == 10.0 and tr.principal_total == 30.0


def test_tab_game_requires_linear_contract():
    pc = PiecewiseConcave((-1.0, 1.0), (-0.2, 0.2))
    with pytest.raises(ValueError):
        play_game2(ConstantMechanism(1, 0), [AgentSpec(LinearCost(0.0))], coin(), pc, [0], seed=0)


def test_piecewise_contract_game1():
    pc = PiecewiseConcave((-1.0, 0.0, 1.0), (-0.5, 0.0, 0.3))
    tr = play_game1(ConstantMechanism(1, 0), [AgentSpec(LinearCost(0.0))], coin(), pc,
                    np.zeros(10, dtype=int), seed=0)
    assert all(r.payment == pytest.approx(0.3) for r in tr.rows)


def test_policy_regret_zero_for_constant_benchmark():
    model = coin()
    agents = [AgentSpec(QuadraticCost(0.5))]
    states = np.zeros(200, dtype=int)
    tr = play_game1(ConstantMechanism(1, 0), agents, model, Linear(0.4), states, seed=0)
    assert policy_regret(tr, model, Linear(0.4), agents, states, expected=True) == pytest.approx(0.0, abs=1e-9)
    deterministic = coin()
    tr = play_game1(ConstantMechanism(1, 0), [AgentSpec(LinearCost(0.0))], deterministic, Linear(0.4), states)
    assert policy_regret(tr, deterministic, Linear(0.4), [AgentSpec(LinearCost(0.0))], states) == pytest.approx(0.0)


def test_benchmark_hand_value():
    # returns {0, 1}, success w.p. a, zero cost, alpha 0.5: effort 1 and utility 0.5 per round
    agents = [AgentSpec(LinearCost(0.0))]
    assert myopic_action(agents[0], coin(), Linear(0.5), 0, [1.0]) == 1.0
    assert benchmark_utilities(coin(), Linear(0.5), agents, np.zeros(8, dtype=int))[0] == pytest.approx(4.0)


def test_symmetric_agents_selected_equally():
    model = OutcomeModel.binary([(0.3, 0.4), (0.3, 0.4)])
    agents = [AgentSpec(QuadraticCost(0.3)), AgentSpec(QuadraticCost(0.3))]
    counts = np.zeros(3)
    for seed in range(40):
        mech = LearnerMechanism(2, make_learner("monobandit-expweights", 3, 300, seed=seed))
        tr = play_game1(mech, agents, model, Linear(0.3), np.zeros(300, dtype=int), seed=seed)
        sel = tr.selections
        counts += [(sel == 0).sum(), (sel == 1).sum(), (sel == OUTSIDE).sum()]
    share = counts[:2] / counts[:2].sum()
    assert abs(share[0] - 0.5) < 0.03


def test_single_certain_agent_utility_floor():
    # zero cost, return 1 at effort 1: the principal should collect (1 - alpha) per round
    # minus at most the bandit regret bound over two arms
    T, alpha = 2000, 0.3
    agents = [AgentSpec(LinearCost(0.0))]
    got = []
    for seed in range(5):
        mech = LearnerMechanism(1, make_learner("monobandit-expweights", 2, T, seed=seed))
        tr = play_game1(mech, agents, coin(), Linear(alpha), np.zeros(T, dtype=int), seed=seed)
        got.append(tr.principal_total)
    assert np.mean(got) >= (1 - alpha) * T - bound_mono_bandit_mw(T, 2)


def test_state_sequence_reproducible():
    a = state_sequence(100, [0.3, 0.7], 4)
    assert np.array_equal(a, state_sequence(100, [0.3, 0.7], 4))
    assert set(a) <= {0, 1}


def test_liability_bound_value():
    assert liability_bound(0.5, 100, 4, 25.0) == pytest.approx(-0.5 * 2 * 100)


def test_rows_carry_draw_identifiers():
    mech = LearnerMechanism(1, make_learner("monobandit-expweights", 2, 5, seed=0))
    tr = play_game1(mech, [AgentSpec(LinearCost(0.0))], coin(), Linear(0.5), np.zeros(5, dtype=int), seed=0)
    assert [r.draws for r in tr.rows] == [(("R_b", t), ("R_f", t)) for t in range(5)]
