"""Monotone online selection mechanisms and repeated contracting simulations."""

from monoselect.core import (
    AdaptiveAdversary,
    NumericalError,
    OnlineTranscript,
    SeededRng,
    check_distribution,
    check_losses,
    normalize,
    sample,
)
from monoselect.full_info import (
    BlumMansour,
    ExpWeights,
    TreeSwap,
    bm_step,
    expweights_step,
    stationary_distribution,
    treeswap_step,
    tuned_eta,
)
from monoselect.contracting import (
    AgentSpec,
    ConstantMechanism,
    LearnerMechanism,
    Linear,
    OutcomeModel,
    PiecewiseConcave,
    liability_bound,
    myopic_action,
    play_game1,
    play_game2,
    policy_regret,
)
from monoselect.desk import TinyGameSpec, check_myopic_under_constant, check_subgame_decomposition, exact_utility
from monoselect.mono_bandit import MonoBandit, choose_epsilon, mono_bandit_round
from monoselect.monotone import PerturbationPair, check_full_info, check_mono_bandit_exact, reproduce_counterexample
from monoselect.regret import (
    RegretReport,
    bound_mono_bandit,
    bound_mono_bandit_mw,
    external_regret,
    regret_report,
    swap_regret,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveAdversary",
    "AgentSpec",
    "BlumMansour",
    "ConstantMechanism",
    "ExpWeights",
    "LearnerMechanism",
    "Linear",
    "MonoBandit",
    "NumericalError",
    "OnlineTranscript",
    "OutcomeModel",
    "PerturbationPair",
    "PiecewiseConcave",
    "RegretReport",
    "SeededRng",
    "TinyGameSpec",
    "TreeSwap",
    "bm_step",
    "bound_mono_bandit",
    "bound_mono_bandit_mw",
    "check_distribution",
    "check_full_info",
    "check_losses",
    "check_mono_bandit_exact",
    "check_myopic_under_constant",
    "check_subgame_decomposition",
    "choose_epsilon",
    "exact_utility",
    "expweights_step",
    "external_regret",
    "liability_bound",
    "mono_bandit_round",
    "myopic_action",
    "normalize",
    "play_game1",
    "play_game2",
    "policy_regret",
    "regret_report",
    "reproduce_counterexample",
    "sample",
    "stationary_distribution",
    "swap_regret",
    "treeswap_step",
    "tuned_eta",
]
