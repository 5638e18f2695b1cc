from __future__ import annotations

from dataclasses import dataclass, field

from ..core import Rng, Transition
from ..errors import ContractViolation, InvalidInputError
from .gridmap import FROZEN, GOAL, WALL, GridMap, default_map

UP, DOWN, LEFT, RIGHT = range(4)
ACTION_LETTERS = "UDLR"
_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass
class FourRoomsEnv:
    """Four-rooms navigation with slippery actions and noisy frozen cells.

    States are flat cell indices ``row * width + col``. The tabular feature
    of a state is the state itself, so the learner's tables are indexed by
    every grid cell (walls included; those rows are never touched).
    """

    map: GridMap = field(default_factory=default_map)
    slip_prob: float = 0.2
    frozen_reward_low: float = -15.0
    frozen_reward_high: float = 15.0
    goal_reward: float = 50.0
    step_cap: int = 500

    num_actions = 4
    tracks_visits = True

    def __post_init__(self):
        if not 0.0 <= self.slip_prob <= 1.0:
            raise InvalidInputError(f"slip_prob must lie in [0, 1], got {self.slip_prob}")
        w = self.map.width
        self._kind = "".join(self.map.rows)
        gr, gc = self.map.goal
        self.goal_state = gr * w + gc
        self._starts = [r * w + c for r, c in self.map.open_cells() if (r, c) != (gr, gc)]

    @property
    def num_features(self) -> int:
        return self.map.width * self.map.height

    @property
    def start_states(self) -> list[int]:
        return list(self._starts)

    def features(self, state: int) -> tuple[int, ...]:
        return (state,)

    def coords(self, state: int) -> tuple[int, int]:
        return divmod(state, self.map.width)

    def state_of(self, row: int, col: int) -> int:
        return row * self.map.width + col

    def is_frozen(self, state: int) -> bool:
        return self._kind[state] == FROZEN

    def is_goal(self, state: int) -> bool:
        return state == self.goal_state

    def reset(self, rng: Rng) -> int:
        return self._starts[rng.sample_index(len(self._starts))]

    def step(self, state: int, action: int, rng: Rng) -> Transition:
        kind = self._kind[state]
        if kind == GOAL:
            raise ContractViolation("cannot step from the goal state")
        if kind == WALL:
            raise ContractViolation(f"state {state} is a wall")
        if not 0 <= action < 4:
            raise InvalidInputError(f"action {action} out of range")
        executed = action
        if rng.sample_uniform() < self.slip_prob:
            executed = rng.sample_index(4)
        dr, dc = _MOVES[executed]
        nxt = state + dr * self.map.width + dc
        target = self._kind[nxt]
        if target == WALL:
            return Transition(state, action, 0.0, state, False)
        if target == GOAL:
            return Transition(state, action, self.goal_reward, nxt, True)
        if target == FROZEN:
            reward = rng.sample_between(self.frozen_reward_low, self.frozen_reward_high)
            return Transition(state, action, reward, nxt, False)
        return Transition(state, action, 0.0, nxt, False)


def fourrooms_reset(env: FourRoomsEnv, rng: Rng) -> int:
    return env.reset(rng)


def fourrooms_step(env: FourRoomsEnv, state: int, action: int, rng: Rng) -> Transition:
    return env.step(state, action, rng)
