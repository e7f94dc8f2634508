"""Proportional veto core toolkit: exact critical epsilons, voting rules and
query-bounded search for common-ground alternatives."""

from .profile import (
    AlternativeDistribution,
    Profile,
    ProfileError,
    UtilityProfile,
    btl_distribution,
    generate_synthetic,
    parse_profile,
    serialize_profile,
    subsample,
    uniform_distribution,
)
from .pvc import (
    BlockingWitness,
    CriticalEpsilonResult,
    classic_pvc,
    critical_epsilon,
    epsilon_pvc,
    max_blocking_slack,
    veto_function,
)
from .rules import RuleOutcome, run_rule, veto_by_consumption, vote_by_gamma_veto, vote_by_veto
from .querysim import OracleEnvironment, QueryTrace, compute_tau, find_epsilon_pvc_element

__version__ = "0.1.0"
