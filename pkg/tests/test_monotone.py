from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoselect.full_info import BlumMansour, ExpWeights, TreeSwap
from monoselect.monotone import (InstanceTooLarge, PerturbationPair, counterexample_losses, check_full_info,
                                 check_mono_bandit_exact, check_mono_bandit_mc, exact_play_probabilities,
                                 load_golden, random_pairs, reproduce_counterexample)


def test_pair_validation():
    with pytest.raises(ValueError):
        PerturbationPair(np.zeros((3, 2)), 3, 0, 0.1)
    with pytest.raises(ValueError):
        PerturbationPair(np.zeros((3, 2)), 0, 0, -0.1)
    pair = PerturbationPair(np.ones((3, 2)), 1, 1, 0.25)
    diff = pair.base_losses - pair.perturbed
    assert diff[1, 1] == 0.25 and np.count_nonzero(diff) == 1


def test_golden_reproduction_passes():
    rep = reproduce_counterexample()
    assert rep.mismatches == []
    assert rep.passed


def test_golden_first_rows():
    rep = reproduce_counterexample()
    np.testing.assert_allclose(rep.l1[0], [0.34215564, 0.31796216, 0.33988219], atol=1e-6)
    np.testing.assert_allclose(rep.diff[-1], [-1.44649313e-4, 1.42826443e-2, -1.41379950e-2], atol=1e-6)


def test_golden_flags_final_two_rounds():
    rep = reproduce_counterexample()
    rounds = [r for r, _, _ in rep.verdict.violating_rounds]
    assert rounds[-2:] == [99, 100]
    diffs = [pp - pb for _, pb, pp in rep.verdict.violating_rounds[-2:]]
    np.testing.assert_allclose(diffs, [-6.58236902e-5, -1.44649313e-4], atol=1e-6)
    assert not rep.verdict.monotone


def test_printed_l2_head_row_is_round_two():
    # the printed difference head equals l2 - l1 at rounds 1-5, which pins
    # the l2 head rows to rounds 2-6
    golden = load_golden()
    l1_rows = golden["l1"][1][:5]
    l2_rows = golden["l2"][1][:5]
    diff_rows = golden["diff"][1][:5]
    rep = reproduce_counterexample()
    np.testing.assert_allclose(rep.diff[:5], diff_rows, atol=1e-6)
    np.testing.assert_allclose(rep.l2[1:6], l2_rows, atol=1e-6)
    # reading the l2 head as rounds 1-5 contradicts the printed difference head
    assert np.abs((l2_rows - l1_rows) - diff_rows).max() > 5e-3


def test_expweights_monotone_on_counterexample():
    pair = PerturbationPair(counterexample_losses()[0], 0, 0, 1.9)
    assert check_full_info(lambda: ExpWeights(3, 0.2), pair, tol=1e-12).monotone


def test_null_perturbation_is_monotone():
    pair = PerturbationPair(counterexample_losses()[0], 0, 0, 0.0)
    assert check_full_info(lambda: BlumMansour(3, 0.2), pair, tol=0.0).monotone


def test_verdict_round_numbering():
    L = np.zeros((4, 2))
    pair = PerturbationPair(L, 2, 0, 1.0)
    v = check_full_info(lambda: ExpWeights(2, 0.1), pair, tol=-1.0)
    # negative tolerance flags every compared round: those after updates 3 and 4
    assert [r for r, _, _ in v.violating_rounds] == [3, 4]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_expweights_monotone_property(seed):
    pair = next(random_pairs(1, seed=seed, max_rounds=60))
    k = pair.base_losses.shape[1]
    assert check_full_info(lambda: ExpWeights(k, 0.3), pair, tol=1e-10).monotone


def test_treeswap_monotone_random_pairs():
    for pair in random_pairs(100, seed=3, max_rounds=80):
        T, k = pair.base_losses.shape
        factory = lambda: TreeSwap(k, T, lambda: ExpWeights(k, 0.4))
        assert check_full_info(factory, pair, tol=1e-10).monotone


def brute_force_marginals(eps, L, eta):
    """Sum over explicit branch sequences, no prefix sharing."""
    import itertools
    T, k = L.shape
    branches = [-1, *range(k)]
    probs = {-1: 1 - eps, **{j: eps / k for j in range(k)}}
    out = np.zeros(k)
    for seq in itertools.product(branches, repeat=T):
        w = np.prod([probs[b] for b in seq])
        ew = ExpWeights(k, eta)
        for t, b in enumerate(seq):
            rec = np.zeros(k)
            if b >= 0:
                rec[b] = k * L[t, b] / eps
            ew.update(rec)
        out += w * (eps / k + (1 - eps) * ew.probs)
    return out


def test_exact_enumeration_against_brute_force():
    L = np.random.default_rng(1).random((4, 2))
    got = exact_play_probabilities(lambda: ExpWeights(2, 0.3), 0.5, L)
    np.testing.assert_allclose(got[-1], brute_force_marginals(0.5, L, 0.3), atol=1e-14)
    np.testing.assert_allclose(got.sum(axis=1), 1.0, atol=1e-12)


def test_mono_bandit_exact_monotone_example():
    L = np.random.default_rng(7).random((4, 2))
    pair = PerturbationPair(L, 1, 0, 0.6)
    assert check_mono_bandit_exact(lambda: ExpWeights(2, 0.5), 0.5, pair).monotone


@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_mono_bandit_degenerate_epsilon(eps):
    L = np.random.default_rng(2).random((4, 2))
    pair = PerturbationPair(L, 0, 1, 0.5)
    v = check_mono_bandit_exact(lambda: ExpWeights(2, 0.5), eps, pair, tol=0.0)
    assert v.monotone
    probs = exact_play_probabilities(lambda: ExpWeights(2, 0.5), eps, L)
    np.testing.assert_allclose(probs, 0.5, atol=1e-15)


def test_exact_rejects_large_instance():
    pair = PerturbationPair(np.zeros((12, 3)), 0, 0, 0.1)
    with pytest.raises(InstanceTooLarge):
        check_mono_bandit_exact(lambda: ExpWeights(3, 0.1), 0.5, pair)


def test_mc_agrees_with_exact_on_small_instance():
    L = np.random.default_rng(5).random((5, 2))
    pair = PerturbationPair(L, 0, 0, 0.8)
    v = check_mono_bandit_mc(lambda: ExpWeights(2, 0.5), 0.5, pair, n_samples=3000, seed=1)
    assert v.monotone


def test_mc_flags_a_clear_violation():
    # a learner that shifts weight towards high-loss arms must be flagged
    class Contrarian(ExpWeights):
        def update(self, loss):
            return super().update(-np.asarray(loss))

    L = np.full((4, 2), 0.5)
    pair = PerturbationPair(L, 0, 0, 0.5)
    v = check_mono_bandit_mc(lambda: Contrarian(2, 1.0), 0.5, pair, n_samples=2000, seed=0)
    assert not v.monotone
