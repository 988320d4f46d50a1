"""Exact solvers and verifiers for real-time transmission of a paired
Markov source over a two-hop noisy cascade with layered feedback.

The package computes optimal deterministic strategies three independent
ways (exhaustive search, belief-state dynamic programming, randomized
falsification) and verifies at small scale that the belief-structured
class attains the unrestricted optimum.
"""

__version__ = "0.1.0"

from .errors import (
    CapExceeded,
    ModelValidationError,
    NestcastError,
    UnknownAtom,
    ZeroProbabilityObservation,
)
from .model import SystemModel, build_special_case, load_model, save_model, validate_model
from .belief import (
    BayesOracle,
    BeliefPi,
    BeliefXi,
    pi_init,
    pi_transition,
    pi_update,
    theta1,
    theta2,
    xi_init,
    xi_update,
)
from .strategy import (
    CoordinatorStrategy,
    GeneralStrategy,
    MarkovStrategy,
    StructuredStrategy,
    lift_to_coordinator,
    lower_from_coordinator,
    load_strategy,
    make_executable,
    map_decode_u,
    map_decode_v,
    save_strategy,
)
from .evaluate import exact_cost, monte_carlo_cost, simulate_episode, trajectory_equivalence
from .plan import EvalPlan
from .search import brute_force_markov, coordinator_dp, falsify_structural

__all__ = [
    "BayesOracle",
    "BeliefPi",
    "BeliefXi",
    "CapExceeded",
    "CoordinatorStrategy",
    "EvalPlan",
    "GeneralStrategy",
    "MarkovStrategy",
    "ModelValidationError",
    "NestcastError",
    "StructuredStrategy",
    "SystemModel",
    "UnknownAtom",
    "ZeroProbabilityObservation",
    "brute_force_markov",
    "build_special_case",
    "coordinator_dp",
    "exact_cost",
    "falsify_structural",
    "lift_to_coordinator",
    "load_model",
    "load_strategy",
    "lower_from_coordinator",
    "make_executable",
    "map_decode_u",
    "map_decode_v",
    "monte_carlo_cost",
    "pi_init",
    "pi_transition",
    "pi_update",
    "save_model",
    "save_strategy",
    "simulate_episode",
    "theta1",
    "theta2",
    "trajectory_equivalence",
    "validate_model",
    "xi_init",
    "xi_update",
]
