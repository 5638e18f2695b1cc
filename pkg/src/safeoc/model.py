"""Option machinery: Boltzmann intra-option policies, sigmoid terminations,
Boltzmann policy over options, and the derived option values.

Tables are indexed by feature. A state is described by the tuple of its
active feature indices (``phi``); every quantity at that state is the sum of
the table rows for those indices. A tabular state is the one-hot case
``phi == (state,)``.

Shapes: ``theta`` and ``q_u`` are ``(features, options, actions)``, ``nu``
is ``(features, options)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericError


@dataclass
class OptionParameters:
    theta: np.ndarray
    nu: np.ndarray
    q_u: np.ndarray
    temperature: float

    def __post_init__(self):
        if self.theta.ndim != 3 or self.theta.shape != self.q_u.shape:
            raise InvalidInputError("theta and q_u must share shape (features, options, actions)")
        if self.nu.shape != self.theta.shape[:2]:
            raise InvalidInputError("nu must have shape (features, options)")
        if self.theta.shape[1] < 1 or self.theta.shape[2] < 1:
            raise InvalidInputError("need at least one option and one action")
        if not self.temperature > 0:
            raise InvalidInputError(f"temperature must be positive, got {self.temperature}")

    @classmethod
    def zeros(cls, num_features: int, num_options: int, num_actions: int, temperature: float):
        shape = (num_features, num_options, num_actions)
        return cls(np.zeros(shape), np.zeros(shape[:2]), np.zeros(shape), float(temperature))

    @property
    def num_features(self) -> int:
        return self.theta.shape[0]

    @property
    def num_options(self) -> int:
        return self.theta.shape[1]

    @property
    def num_actions(self) -> int:
        return self.theta.shape[2]

    def copy(self) -> "OptionParameters":
        return OptionParameters(self.theta.copy(), self.nu.copy(), self.q_u.copy(), self.temperature)

    def all_finite(self) -> bool:
        return bool(
            np.isfinite(self.theta).all() and np.isfinite(self.nu).all() and np.isfinite(self.q_u).all()
        )

    def same_as(self, other: "OptionParameters") -> bool:
        """Bitwise equality of all three tables."""
        return (
            self.theta.tobytes() == other.theta.tobytes()
            and self.nu.tobytes() == other.nu.tobytes()
            and self.q_u.tobytes() == other.q_u.tobytes()
        )


@dataclass(frozen=True)
class GradRecord:
    """Sparse gradient over ``theta``: entry ``[i, option, a]`` equals
    ``values[a]`` for every ``i`` in ``features``; all other entries are 0."""

    features: tuple[int, ...]
    option: int
    values: np.ndarray

    def dense(self, shape) -> np.ndarray:
        out = np.zeros(shape)
        for i in self.features:
            out[i, self.option] += self.values
        return out


def rows(table: np.ndarray, phi) -> np.ndarray:
    if len(phi) == 1:
        return table[phi[0]]
    return table[list(phi)].sum(axis=0)


# Per-state work runs on Python lists: action and option counts are tiny and
# list arithmetic is several times faster than numpy at this size.

def boltzmann(values: list, temperature: float) -> list:
    m = max(values)
    e = [math.exp((v - m) / temperature) for v in values]
    s = sum(e)
    if not math.isfinite(s) or s <= 0.0:
        raise NumericError(f"non-finite preferences {values}")
    return [x / s for x in e]


def option_values(prefs: list, q: list, temperature: float) -> list:
    """Expected ``q`` row under the Boltzmann policy of each preference row."""
    out = []
    for p_row, q_row in zip(prefs, q):
        pi = boltzmann(p_row, temperature)
        out.append(sum(w * v for w, v in zip(pi, q_row)))
    return out


def softmax(prefs: np.ndarray, temperature: float) -> np.ndarray:
    """Boltzmann distribution over the last axis of ``prefs``."""
    prefs = np.asarray(prefs, dtype=float)
    if prefs.ndim == 1:
        return np.array(boltzmann(prefs.tolist(), temperature))
    return np.array([softmax(p, temperature) for p in prefs])


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _check_option(params: OptionParameters, option: int) -> None:
    if not 0 <= option < params.num_options:
        raise InvalidInputError(f"option {option} out of range [0, {params.num_options})")


def action_probs(params: OptionParameters, option: int, phi) -> list:
    return boltzmann(rows(params.theta, phi)[option].tolist(), params.temperature)


def option_value_list(params: OptionParameters, phi) -> list:
    return option_values(rows(params.theta, phi).tolist(), rows(params.q_u, phi).tolist(), params.temperature)


def intra_option_probs(params: OptionParameters, option: int, phi) -> np.ndarray:
    _check_option(params, option)
    return np.array(action_probs(params, option, phi))


def termination_prob(params: OptionParameters, option: int, phi) -> float:
    _check_option(params, option)
    if len(phi) == 1:
        return sigmoid(float(params.nu[phi[0], option]))
    return sigmoid(float(sum(params.nu[i, option] for i in phi)))


def q_omega_all(params: OptionParameters, phi) -> np.ndarray:
    """Option values at ``phi``: expectation of ``q_u`` under each intra-option policy."""
    return np.array(option_value_list(params, phi))


def q_omega(params: OptionParameters, phi, option: int) -> float:
    _check_option(params, option)
    pi = action_probs(params, option, phi)
    q = rows(params.q_u, phi)[option].tolist()
    return sum(w * v for w, v in zip(pi, q))


def policy_over_options(params: OptionParameters, phi) -> np.ndarray:
    return np.array(boltzmann(option_value_list(params, phi), params.temperature))


def boltzmann_mean(values: list, temperature: float) -> float:
    w = boltzmann(values, temperature)
    return sum(a * b for a, b in zip(w, values))


def v_omega(params: OptionParameters, phi) -> float:
    return boltzmann_mean(option_value_list(params, phi), params.temperature)


def grad_log_intra_option(params: OptionParameters, option: int, phi, action: int) -> GradRecord:
    """d log pi(action | phi, option) / d theta, per active feature."""
    _check_option(params, option)
    pi = action_probs(params, option, phi)
    g = [-p / params.temperature for p in pi]
    g[action] = (1.0 - pi[action]) / params.temperature
    return GradRecord(tuple(phi), option, np.array(g))
