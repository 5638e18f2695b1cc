"""Option-critic with a TD-error variance penalty on the initial
state-option pair, plus four-rooms and cart-pole experiment tooling."""

from .core import Rng, Transition, new_rng, sample_categorical
from .learner import (
    Controllability,
    EpisodeAnchor,
    LearnerConfig,
    actor_update,
    critic_update,
    estimate_controllability,
    run_episode,
    td_error,
    termination_update,
)
from .model import OptionParameters

__version__ = "0.1.0"

__all__ = [
    "Controllability",
    "EpisodeAnchor",
    "LearnerConfig",
    "OptionParameters",
    "Rng",
    "Transition",
    "actor_update",
    "critic_update",
    "estimate_controllability",
    "new_rng",
    "run_episode",
    "sample_categorical",
    "td_error",
    "termination_update",
]
