from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoselect.core import SeededRng
from monoselect.full_info import ExpWeights
from monoselect.mono_bandit import (EXPLOIT, MonoBandit, branch_probabilities, choose_epsilon,
                                    expected_recorded_vector, mono_bandit_round, recorded_vector, widened_range)
from monoselect.regret import bound_mono_bandit, mw_regret_bound


def test_choose_epsilon_worked_example():
    R = mw_regret_bound(10**4, 3)
    assert R == pytest.approx(104.8, abs=0.05)
    assert choose_epsilon(10**4, 3, R) == pytest.approx(0.1773, abs=5e-4)


def test_choose_epsilon_edges():
    assert choose_epsilon(100, 3, 0.0) == 0.0
    assert choose_epsilon(100, 3, 50.0) == 1.0
    with pytest.raises(ValueError):
        choose_epsilon(0, 3, 1.0)


def test_epsilon_minimises_tradeoff():
    T, k, R = 10**4, 3, 104.8
    eps = choose_epsilon(T, k, R)
    value = k / eps * R + eps * T
    grid = np.linspace(0.01, 1, 2000)
    assert value <= (k / grid * R + grid * T).min() + 1e-9
    assert value <= bound_mono_bandit(T, k, R) + 1e-9


def test_recorded_vector():
    l = np.array([0.2, 0.8, 0.5])
    assert np.array_equal(recorded_vector(l, EXPLOIT, 0.3), np.zeros(3))
    np.testing.assert_allclose(recorded_vector(l, 1, 0.3), [0, 3 * 0.8 / 0.3, 0])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.floats(0.01, 1.0), st.integers(0, 2**31 - 1))
def test_estimator_unbiased(k, eps, seed):
    l = np.random.default_rng(seed).uniform(-2, 1, size=k)
    np.testing.assert_allclose(expected_recorded_vector(l, eps), l, atol=1e-12)


def test_branch_probabilities_sum_to_one():
    p = branch_probabilities(4, 0.3)
    assert p[0] == pytest.approx(0.7) and p.sum() == pytest.approx(1.0)


def test_widened_range():
    assert widened_range(3, 0.5) == (0.0, 6.0)
    assert widened_range(3, 0.5, -1, 1) == (-6.0, 6.0)


def test_each_round_uses_one_draw_per_stream():
    mb = MonoBandit(ExpWeights(3, 0.1), 0.4, seed=9)
    for t in range(25):
        mb.play_round(lambda arm: 0.5)
        assert mb.rng_b.draws == t + 1 and mb.rng_f.draws == t + 1


def test_epsilon_one_is_pure_uniform_exploration():
    mb = MonoBandit(ExpWeights(3, 0.1), 1.0, seed=1)
    explores = [mb.play_round(lambda a: 1.0)[1] for _ in range(200)]
    assert all(explores)
    np.testing.assert_allclose(mb.probs, [1 / 3] * 3)


def test_epsilon_zero_never_updates_inner():
    mb = MonoBandit(ExpWeights(3, 0.1), 0.0, seed=1)
    for _ in range(50):
        mb.play_round(lambda a: 1.0)
    np.testing.assert_allclose(mb.inner.probs, [1 / 3] * 3)


def test_inner_sees_only_recorded_vectors():
    mb = MonoBandit(ExpWeights(2, 0.5), 0.5, seed=3)
    mb.keep_history = True
    ref = ExpWeights(2, 0.5)
    for _ in range(40):
        mb.play_round(lambda a: [0.1, 0.9][a])
        ref.update(mb.sampled_losses[-1])
    np.testing.assert_allclose(mb.inner.probs, ref.probs)


def test_marginal_matches_empirical_selection():
    inner = ExpWeights(3, 0.1)
    inner.update([0.0, 3.0, 6.0])
    mb = MonoBandit(inner, 0.3, seed=0)
    expected = mb.probs.copy()
    counts = np.zeros(3)
    n = 40_000
    for _ in range(n):
        counts[mb.select()[0]] += 1
    assert np.abs(counts / n - expected).max() < 0.01


def test_functional_round_matches_method():
    a = MonoBandit(ExpWeights(2, 0.3), 0.5, seed=4)
    b = a.copy()
    new, arm, ex = mono_bandit_round(a, SeededRng(4, "R_b"), SeededRng(4, "R_f"), lambda i: 0.25)
    arm2, ex2 = b.play_round(lambda i: 0.25)
    assert (arm, ex) == (arm2, ex2)
    np.testing.assert_array_equal(new.inner.probs, b.inner.probs)
    np.testing.assert_allclose(a.inner.probs, [0.5, 0.5])


def test_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        MonoBandit(ExpWeights(2, 0.1), 1.5)
