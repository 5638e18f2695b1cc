"""Safe option-critic: tabular / linear intra-option learning with a
penalty on the squared TD error of the episode's initial state-option pair.

All update functions mutate ``params`` in place and return it. States are
passed as feature tuples (see :mod:`safeoc.model`); with several active
features every update is split evenly across them.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .core import Rng, Transition, check_gamma
from .errors import ContractViolation, InvalidInputError
from .model import (
    OptionParameters,
    action_probs,
    boltzmann_mean,
    grad_log_intra_option,
    option_value_list,
    policy_over_options,
    rows,
    termination_prob,
)


@dataclass(frozen=True)
class LearnerConfig:
    psi: float = 0.0
    gamma: float = 0.99
    alpha_critic: float = 0.1
    alpha_theta: float = 0.01
    alpha_nu: float = 0.01
    temperature: float = 0.001
    num_options: int = 4

    def __post_init__(self):
        check_gamma(self.gamma)
        if not self.psi >= 0:
            raise InvalidInputError(f"psi must be >= 0, got {self.psi}")
        for name in ("alpha_critic", "alpha_theta", "alpha_nu", "temperature"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.num_options < 1:
            raise InvalidInputError(f"num_options must be >= 1, got {self.num_options}")

    def new_params(self, num_features: int, num_actions: int) -> OptionParameters:
        return OptionParameters.zeros(num_features, self.num_options, num_actions, self.temperature)


@dataclass
class EpisodeAnchor:
    """The initial state-option pair, its last action and last TD error."""

    s0: tuple[int, ...]
    omega0: int
    a0: int
    delta0: float

    def matches(self, phi, option: int) -> bool:
        return option == self.omega0 and tuple(phi) == self.s0

    def refresh(self, action: int, delta: float) -> None:
        self.a0 = action
        self.delta0 = delta


@dataclass(frozen=True)
class Controllability:
    """Monte-Carlo estimate of ``-E[delta^2]`` with its standard error."""

    value: float
    stderr: float
    n_samples: int


@dataclass
class EpisodeRecord:
    discounted_return: float
    steps: int
    terminal: bool
    frozen_visits: int = 0
    visits: Counter = field(default_factory=Counter)


def td_error(params: OptionParameters, config: LearnerConfig, t: Transition, option: int) -> float:
    q_sa = float(rows(params.q_u, t.state)[option, t.action])
    if t.terminal:
        return t.reward - q_sa
    q_next = option_value_list(params, t.next_state)
    beta = termination_prob(params, option, t.next_state)
    target = (1.0 - beta) * q_next[option] + beta * max(q_next)
    return t.reward + config.gamma * target - q_sa


def critic_update(params: OptionParameters, phi, option: int, action: int, delta: float,
                  alpha_critic: float) -> OptionParameters:
    step = alpha_critic * delta / len(phi)
    for i in phi:
        params.q_u[i, option, action] += step
    return params


def actor_update(params: OptionParameters, config: LearnerConfig, phi, option: int, action: int,
                 anchor: EpisodeAnchor | None) -> OptionParameters:
    if anchor is None:
        raise ContractViolation("actor_update needs the episode anchor to be set")
    grad = grad_log_intra_option(params, option, phi, action)
    q_sa = float(rows(params.q_u, phi)[option, action])
    penalty = config.alpha_theta * config.psi * anchor.delta0 * anchor.delta0
    # both gradients are taken at the pre-update theta
    grad0 = grad_log_intra_option(params, anchor.omega0, anchor.s0, anchor.a0) if penalty else None
    step = config.alpha_theta * q_sa / len(phi)
    for i in phi:
        params.theta[i, option] += step * grad.values
    if grad0 is not None:
        step0 = penalty / len(anchor.s0)
        for i in anchor.s0:
            params.theta[i, anchor.omega0] -= step0 * grad0.values
    return params


def termination_update(params: OptionParameters, config: LearnerConfig, next_phi,
                       option: int) -> OptionParameters:
    beta = termination_prob(params, option, next_phi)
    q = option_value_list(params, next_phi)
    advantage = q[option] - boltzmann_mean(q, params.temperature)
    step = config.alpha_nu * beta * (1.0 - beta) * advantage / len(next_phi)
    for i in next_phi:
        params.nu[i, option] -= step
    return params


def run_episode(env, params: OptionParameters, config: LearnerConfig, rng: Rng,
                step_cap: int | None = None, learn: bool = True) -> EpisodeRecord:
    """Run one episode, updating ``params`` in place unless ``learn`` is False.

    Per step: sample an action from the active option, step the environment,
    compute the TD error from pre-update values, refresh the anchor when the
    agent is back at ``(s0, omega0)``, then update critic, intra-option policy
    and termination in that order. If the option terminates in a non-terminal
    next state a new one is drawn from the policy over options. Hitting
    ``step_cap`` truncates the episode; its last update bootstraps.
    """
    cap = env.step_cap if step_cap is None else step_cap
    track = getattr(env, "tracks_visits", False)
    record = EpisodeRecord(0.0, 0, False)

    state = env.reset(rng)
    phi = env.features(state)
    option = rng.sample_categorical(policy_over_options(params, phi).tolist())
    anchor: EpisodeAnchor | None = None
    discount = 1.0

    while record.steps < cap:
        action = rng.sample_categorical(action_probs(params, option, phi))
        t = env.step(state, action, rng)
        next_phi = env.features(t.next_state)
        record.steps += 1
        record.discounted_return += discount * t.reward
        discount *= config.gamma
        if track:
            record.visits[t.next_state] += 1
            if env.is_frozen(t.next_state):
                record.frozen_visits += 1

        if learn:
            delta = td_error(params, config, Transition(phi, action, t.reward, next_phi, t.terminal), option)
            if anchor is None:
                anchor = EpisodeAnchor(tuple(phi), option, action, delta)
            elif anchor.matches(phi, option):
                anchor.refresh(action, delta)
            critic_update(params, phi, option, action, delta, config.alpha_critic)
            actor_update(params, config, phi, option, action, anchor)
            termination_update(params, config, next_phi, option)

        if t.terminal:
            record.terminal = True
            break
        if rng.sample_uniform() < termination_prob(params, option, next_phi):
            option = rng.sample_categorical(policy_over_options(params, next_phi).tolist())
        state, phi = t.next_state, next_phi
    return record


def estimate_controllability(env, params: OptionParameters, config: LearnerConfig, state, option: int,
                             n_samples: int, rng: Rng) -> Controllability:
    """Sample ``-E[delta^2]`` at ``(state, option)`` without touching ``params``."""
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    phi = env.features(state)
    probs = action_probs(params, option, phi)
    total = 0.0
    total_sq = 0.0
    for _ in range(n_samples):
        action = rng.sample_categorical(probs)
        t = env.step(state, action, rng)
        delta = td_error(
            params, config, Transition(phi, action, t.reward, env.features(t.next_state), t.terminal), option
        )
        d2 = delta * delta
        total += d2
        total_sq += d2 * d2
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    stderr = math.sqrt(var / n_samples) if n_samples > 1 else math.inf
    return Controllability(-mean, stderr, n_samples)
