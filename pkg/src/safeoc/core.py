"""Seeded randomness and the interaction records shared by every module.

The generator is CPython's ``random.Random``, i.e. MT19937 seeded with
``init_by_array`` on the integer seed. Uniform doubles come from
``genrand_res53``: two 32-bit outputs ``a, b`` give ``(a >> 5) * 2**26 + (b >> 6)``
scaled by ``2**-53``. Python guarantees ``random()`` keeps producing this
stream for a given integer seed across versions and platforms, and the
algorithm is the reference Matsumoto-Nishimura code, so a port in any
language can reproduce it bit for bit.

Every other draw is derived from exactly one uniform:

* ``sample_categorical`` scans cumulative probabilities in ascending index
  order and returns the first index whose running sum exceeds ``u``.
* ``sample_index(n)`` returns ``floor(u * n)``.
* ``sample_between(lo, hi)`` returns ``lo + (hi - lo) * u``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import InvalidInputError


class Rng:
    """Single-owner deterministic generator. Never share across trials."""

    __slots__ = ("seed", "_gen")

    def __init__(self, seed: int):
        if seed < 0:
            raise InvalidInputError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self._gen = random.Random(self.seed)

    def sample_uniform(self) -> float:
        return self._gen.random()

    def sample_index(self, n: int) -> int:
        return int(self._gen.random() * n)

    def sample_between(self, low: float, high: float) -> float:
        return low + (high - low) * self._gen.random()

    def sample_categorical(self, probs: Sequence[float]) -> int:
        total = 0.0
        for p in probs:
            if p < 0.0:
                raise InvalidInputError(f"negative probability {p}")
            total += p
        if abs(total - 1.0) > 1e-6:
            raise InvalidInputError(f"probabilities sum to {total}, not 1")
        u = self._gen.random()
        acc = 0.0
        last = 0
        for i, p in enumerate(probs):
            if p > 0.0:
                acc += p
                last = i
                if u < acc:
                    return i
        # u landed in the rounding gap above the cumulative sum
        return last

    def getstate(self):
        return self._gen.getstate()

    def setstate(self, state) -> None:
        self._gen.setstate(state)


def new_rng(seed: int) -> Rng:
    return Rng(seed)


def sample_categorical(rng: Rng, probs: Sequence[float]) -> int:
    return rng.sample_categorical(probs)


@dataclass(frozen=True)
class Transition:
    """One environment interaction.

    ``state``/``next_state`` hold whatever the producer works in: an
    environment state (grid cell, cart-pole tuple) or, inside the learner,
    the tuple of active feature indices for that state.
    """

    state: Any
    action: int
    reward: float
    next_state: Any
    terminal: bool


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not (0.0 <= gamma <= 1.0) or math.isnan(gamma):
        raise InvalidInputError(f"discount factor must lie in [0, 1], got {gamma}")
    return gamma
