from __future__ import annotations

import numpy as np
import pytest

from monoselect.contracting import OUTSIDE, OutcomeModel, QuadraticCost
from monoselect.desk import (ConstantRule, DeskError, StickOnSuccess, TableRule, TinyGameSpec,
                             check_effort_not_below_myopic, check_myopic_under_constant,
                             check_subgame_decomposition, exact_utility, incentive_spec, key_probability,
                             mc_utility, myopic_grid_effort, myopic_profile, random_policy_profile,
                             random_tiny_spec)

GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def coin_spec(alpha=0.6, gamma=0.5, horizon=1, mechanism=ConstantRule(0), k=1, grid=GRID):
    model = OutcomeModel.binary([(0.0, 1.0)] * k)
    return TinyGameSpec(model, alpha, [QuadraticCost(gamma)] * k, horizon, [[1.0]], grid, mechanism)


def constant_policy(spec, effort):
    return [{key: effort for key in spec.all_keys()} for _ in range(spec.k)]


@pytest.mark.parametrize("a", GRID)
def test_single_round_closed_form(a):
    spec = coin_spec()
    assert exact_utility(spec, constant_policy(spec, a), 0) == pytest.approx(0.6 * a - 0.5 * a * a, abs=1e-15)


def test_size_limits_enforced():
    with pytest.raises(DeskError):
        coin_spec(horizon=4)
    with pytest.raises(DeskError):
        coin_spec(grid=tuple(np.linspace(0, 1, 6)))


def test_missing_policy_key_is_config_error():
    spec = coin_spec(horizon=2)
    with pytest.raises(DeskError):
        exact_utility(spec, [{}], 0)


def test_symmetric_agents_equal_utilities():
    # the published number picks the agent, so the two seats are interchangeable
    model = OutcomeModel.binary([(0.1, 0.7)] * 2)
    spec = TinyGameSpec(model, 0.4, [QuadraticCost(0.3)] * 2, 2, [[1.0]], GRID,
                        lambda history, r: r, n_random=2)
    pol = constant_policy(spec, 0.5)
    assert exact_utility(spec, pol, 0) == pytest.approx(exact_utility(spec, pol, 1), abs=1e-15)


def test_table_rule_lookup():
    rule = TableRule(((((), 0), 1), ((((1, 0),), 0), 0)))
    assert rule((), 0) == 1 and rule(((1, 0),), 0) == 0 and rule(((1, 1),), 0) == OUTSIDE


def test_zero_probability_prefix_changes_nothing():
    coin = OutcomeModel.binary([(0.0, 1.0)])
    model = OutcomeModel(coin.returns, np.repeat(coin.slopes, 2, axis=2), np.repeat(coin.intercepts, 2, axis=2))
    spec = TinyGameSpec(model, 0.5, [QuadraticCost(0.3)], 2, [[1.0, 0.0], [0.5, 0.5]], GRID)
    pol = constant_policy(spec, 0.5)
    unreachable = [key for key in spec.all_keys() if key_probability(spec, key) == 0][0]
    chk = check_subgame_decomposition(spec, pol, 0, {unreachable: 1.0})
    assert chk.probability == 0.0 and chk.delta_total == 0.0 and chk.residual == 0.0


def test_certain_first_round_prefix():
    spec = coin_spec(horizon=2)
    pol = constant_policy(spec, 0.25)
    key = ((), 0, 0)
    assert key_probability(spec, key) == 1.0
    chk = check_subgame_decomposition(spec, pol, 0, {key: 0.75})
    assert chk.delta_total == pytest.approx(chk.delta_subgame, abs=1e-15)


def test_multi_key_deviation_rejected():
    spec = coin_spec(horizon=2)
    keys = spec.all_keys()[:2]
    with pytest.raises(DeskError):
        check_subgame_decomposition(spec, constant_policy(spec, 0.5), 0, {keys[0]: 1.0, keys[1]: 0.0})


def test_decomposition_on_random_specs():
    for seed in range(15):
        spec = random_tiny_spec(seed)
        pol = random_policy_profile(spec, seed)
        keys = spec.all_keys()
        key = keys[seed % len(keys)]
        for i in range(spec.k):
            chk = check_subgame_decomposition(spec, pol, i, {key: spec.grid[-1 - seed % len(spec.grid)]})
            assert chk.residual <= 1e-12


def test_zero_cost_agent_max_effort_is_myopic_and_optimal():
    spec = coin_spec(gamma=0.0, horizon=2, grid=(0.0, 0.5, 1.0))
    assert myopic_grid_effort(spec, 0, 0) == 1.0
    verdict = check_myopic_under_constant(spec, 0)
    assert verdict.holds and verdict.n_policies == 3 ** 3


def test_grid_myopic_optimal_with_off_grid_interior_optimum():
    # continuous optimum is 0.6 / (2 * 0.45) = 2/3, between grid points
    spec = coin_spec(alpha=0.6, gamma=0.45, horizon=2, grid=(0.0, 0.25, 0.5, 0.75, 1.0))
    assert myopic_grid_effort(spec, 0, 0) == 0.75
    assert check_myopic_under_constant(spec, 0).holds


def test_myopic_check_needs_constant_selection():
    with pytest.raises(DeskError):
        check_myopic_under_constant(coin_spec(mechanism=StickOnSuccess(0, 1)), 0)


def test_constant_selection_utility_factorises():
    spec = coin_spec(alpha=0.5, gamma=0.4, horizon=2)
    first = ((), 0, 0)
    for a1 in GRID:
        for a2 in GRID:
            pol = [{key: (a1 if key == first else a2) for key in spec.all_keys()}]
            want = (0.5 * a1 - 0.4 * a1 ** 2) + (0.5 * a2 - 0.4 * a2 ** 2)
            assert exact_utility(spec, pol, 0) == pytest.approx(want, abs=1e-15)


def test_monte_carlo_agrees_with_enumeration():
    for seed in (1, 4):
        spec = random_tiny_spec(seed)
        pol = random_policy_profile(spec, seed)
        for i in range(spec.k):
            mean, se = mc_utility(spec, pol, i, n=200_000, seed=seed)
            assert abs(mean - exact_utility(spec, pol, i)) <= 3 * se + 1e-12


def test_outside_option_gives_zero():
    spec = coin_spec(horizon=2, mechanism=ConstantRule(OUTSIDE))
    assert exact_utility(spec, constant_policy(spec, 1.0), 0) == 0.0


def test_round_one_effort_not_below_myopic_single_spec():
    spec = incentive_spec(0)
    chk = check_effort_not_below_myopic(spec, 0)
    assert chk.holds
    assert len(chk.values) == len(spec.grid)


def test_incentive_check_preconditions():
    spec = coin_spec(horizon=2, k=2, mechanism=ConstantRule(1))
    with pytest.raises(DeskError):
        check_effort_not_below_myopic(spec, 0)


def test_myopic_profile_covers_all_keys():
    spec = random_tiny_spec(3)
    prof = myopic_profile(spec)
    assert all(set(p) == set(spec.all_keys()) for p in prof)
