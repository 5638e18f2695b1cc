"""Plain option-critic (no controllability term), kept as a reference
learner. It shares the option model with the safe learner but has its own
episode loop, so the two can be checked against each other."""

from __future__ import annotations

import numpy as np

from .core import Rng
from .model import (
    OptionParameters,
    action_probs,
    boltzmann_mean,
    option_value_list,
    policy_over_options,
    rows,
    termination_prob,
)


class OptionCritic:
    def __init__(self, params: OptionParameters, gamma: float, alpha_critic: float,
                 alpha_theta: float, alpha_nu: float):
        self.params = params
        self.gamma = gamma
        self.alpha_critic = alpha_critic
        self.alpha_theta = alpha_theta
        self.alpha_nu = alpha_nu

    def _delta(self, phi, option, action, reward, next_phi, done):
        p = self.params
        q_sa = float(rows(p.q_u, phi)[option, action])
        if done:
            return reward - q_sa
        q = option_value_list(p, next_phi)
        beta = termination_prob(p, option, next_phi)
        return reward + self.gamma * ((1.0 - beta) * q[option] + beta * max(q)) - q_sa

    def _learn(self, phi, option, action, reward, next_phi, done):
        p = self.params
        delta = self._delta(phi, option, action, reward, next_phi, done)
        n = len(phi)

        step = self.alpha_critic * delta / n
        for i in phi:
            p.q_u[i, option, action] += step

        pi = action_probs(p, option, phi)
        g = [-x / p.temperature for x in pi]
        g[action] = (1.0 - pi[action]) / p.temperature
        g = np.array(g)
        step = self.alpha_theta * float(rows(p.q_u, phi)[option, action]) / n
        for i in phi:
            p.theta[i, option] += step * g

        beta = termination_prob(p, option, next_phi)
        q = option_value_list(p, next_phi)
        adv = q[option] - boltzmann_mean(q, p.temperature)
        step = self.alpha_nu * beta * (1.0 - beta) * adv / len(next_phi)
        for i in next_phi:
            p.nu[i, option] -= step

    def episode(self, env, rng: Rng, step_cap: int | None = None) -> tuple[float, int]:
        """Train for one episode; returns (discounted return, steps)."""
        p = self.params
        cap = env.step_cap if step_cap is None else step_cap
        state = env.reset(rng)
        phi = env.features(state)
        option = rng.sample_categorical(policy_over_options(p, phi).tolist())
        ret, disc, steps = 0.0, 1.0, 0
        while steps < cap:
            action = rng.sample_categorical(action_probs(p, option, phi))
            t = env.step(state, action, rng)
            next_phi = env.features(t.next_state)
            steps += 1
            ret += disc * t.reward
            disc *= self.gamma
            self._learn(phi, option, action, t.reward, next_phi, t.terminal)
            if t.terminal:
                break
            if rng.sample_uniform() < termination_prob(p, option, next_phi):
                option = rng.sample_categorical(policy_over_options(p, next_phi).tolist())
            state, phi = t.next_state, next_phi
        return ret, steps
