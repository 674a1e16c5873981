"""Online inverse reinforcement learning via Bellman gradient iteration."""

from ._oirl import *  # noqa: F401,F403
from ._oirl import (
    ConvergenceError,
    Error,
    InvalidModel,
    LearnerError,
    OnlineLearner,
    ShapeMismatch,
)

__all__ = [
    "ConvergenceError",
    "Error",
    "InvalidModel",
    "LearnerError",
    "OnlineLearner",
    "ShapeMismatch",
    "action_log_likelihood",
    "approx_max",
    "approx_max_gap",
    "approx_max_weights",
    "approximate_value_iteration",
    "bellman_gradient_iteration",
    "boltzmann_policy",
    "cleaning_energy_cost",
    "exact_value_iteration",
    "generate_observations",
    "init_params",
    "make_environment",
    "pearson_correlation",
    "reward",
    "reward_jacobian",
    "run_experiment",
]
