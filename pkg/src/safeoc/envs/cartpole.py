"""Classic cart-pole balancing, integrated with explicit Euler."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..core import Rng, Transition
from ..errors import ContractViolation, InvalidInputError
from .tiles import TileCoder

LEFT, RIGHT = 0, 1


def default_coder() -> TileCoder:
    return TileCoder(
        bins=(3, 3, 3, 6),
        low=(-2.4, -1.5, -12 * math.pi / 180, -2.0),
        high=(2.4, 1.5, 12 * math.pi / 180, 2.0),
        tilings=1,
    )


@dataclass
class CartPoleEnv:
    """State is ``(x, x_dot, theta, theta_dot)`` in SI units.

    ``step`` is a pure function of the given state; the environment object
    only carries constants and the feature coder.
    """

    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    force_mag: float = 10.0
    tau: float = 0.02
    position_limit: float = 2.4
    angle_limit: float = 12 * 2 * math.pi / 360
    step_cap: int = 200
    init_spread: float = 0.05
    coder: TileCoder = field(default_factory=default_coder)

    num_actions = 2
    tracks_visits = False

    @property
    def num_features(self) -> int:
        return self.coder.size

    def features(self, state) -> tuple[int, ...]:
        return self.coder.encode(state)

    def is_terminal(self, state) -> bool:
        x, _, theta, _ = state
        return abs(x) > self.position_limit or abs(theta) > self.angle_limit

    def reset(self, rng: Rng):
        s = self.init_spread
        return tuple(rng.sample_between(-s, s) for _ in range(4))

    def step(self, state, action: int, rng: Rng | None = None) -> Transition:
        if self.is_terminal(state):
            raise ContractViolation(f"cannot step from terminal state {state}")
        if action not in (LEFT, RIGHT):
            raise InvalidInputError(f"action {action} out of range")
        x, x_dot, theta, theta_dot = state
        force = self.force_mag if action == RIGHT else -self.force_mag
        total_mass = self.cart_mass + self.pole_mass
        pml = self.pole_mass * self.half_length
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        temp = (force + pml * theta_dot * theta_dot * sin_t) / total_mass
        theta_acc = (self.gravity * sin_t - cos_t * temp) / (
            self.half_length * (4.0 / 3.0 - self.pole_mass * cos_t * cos_t / total_mass)
        )
        x_acc = temp - pml * theta_acc * cos_t / total_mass
        nxt = (
            x + self.tau * x_dot,
            x_dot + self.tau * x_acc,
            theta + self.tau * theta_dot,
            theta_dot + self.tau * theta_acc,
        )
        return Transition(state, action, 1.0, nxt, self.is_terminal(nxt))


def cartpole_step(env: CartPoleEnv, state, action: int) -> Transition:
    return env.step(state, action)
