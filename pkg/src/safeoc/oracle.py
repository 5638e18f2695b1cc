"""Brute-force references for the tests: exact TD-error moments on small
enumerable MDPs, central finite differences, closed-form chain values.

Nothing here imports the learner; the TD error is recomputed from the raw
parameter tables so the oracle stays independent of the code it checks.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .core import Rng, Transition
from .errors import InvalidInputError, NumericError

MAX_OUTCOMES = 1000


@dataclass
class EnumerableMdp:
    """Finite MDP with finite reward supports.

    ``table[(s, a)]`` lists ``(next_state, prob, [(reward, prob_r), ...])``.
    States without outgoing rows are terminal. The object doubles as an
    environment (``reset``/``step``/``features``) so learners can run on it.
    """

    num_states: int
    num_actions: int
    table: dict
    gamma: float = 0.9
    start: int = 0
    step_cap: int = 100

    tracks_visits = False

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidInputError(f"gamma must lie in [0, 1], got {self.gamma}")
        for (s, a), outs in self.table.items():
            total = sum(p for _, p, _ in outs)
            if abs(total - 1.0) > 1e-12:
                raise InvalidInputError(f"P(.|{s},{a}) sums to {total}")
            for s2, _, rewards in outs:
                rt = sum(q for _, q in rewards)
                if abs(rt - 1.0) > 1e-12:
                    raise InvalidInputError(f"reward distribution of ({s},{a},{s2}) sums to {rt}")
                if not all(math.isfinite(r) for r, _ in rewards):
                    raise InvalidInputError(f"non-finite reward in ({s},{a},{s2})")

    @property
    def num_features(self) -> int:
        return self.num_states

    def is_terminal(self, s: int) -> bool:
        return all((s, a) not in self.table for a in range(self.num_actions))

    def features(self, s: int) -> tuple[int, ...]:
        return (s,)

    def reset(self, rng: Rng) -> int:
        return self.start

    def step(self, s: int, a: int, rng: Rng) -> Transition:
        outs = self.table[(s, a)]
        s2, _, rewards = outs[rng.sample_categorical([p for _, p, _ in outs])]
        r = rewards[rng.sample_categorical([q for _, q in rewards])][0]
        return Transition(s, a, r, s2, self.is_terminal(s2))


def parse_mdp(text: str, gamma: float | None = None) -> EnumerableMdp:
    """Parse ``s a s' prob reward prob_r`` lines.

    Optional header lines: ``gamma <value>``, ``start <state>``,
    ``actions <count>``. ``#`` starts a comment.
    """
    header = {"gamma": 0.9, "start": 0}
    raw = defaultdict(lambda: defaultdict(lambda: [0.0, []]))
    max_state, max_action = 0, 0
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] in ("gamma", "start", "actions"):
            header[line[0]] = float(line[1]) if line[0] == "gamma" else int(line[1])
            continue
        if len(line) != 6:
            raise InvalidInputError(f"line {lineno}: expected 6 fields, got {len(line)}")
        s, a, s2 = int(line[0]), int(line[1]), int(line[2])
        p, r, pr = float(line[3]), float(line[4]), float(line[5])
        entry = raw[(s, a)][s2]
        # the transition probability repeats on every reward line of (s, a, s')
        entry[0] = p
        entry[1].append((r, pr))
        max_state = max(max_state, s, s2)
        max_action = max(max_action, a)
    table = {
        key: [(s2, p, rewards) for s2, (p, rewards) in sorted(outs.items())]
        for key, outs in raw.items()
    }
    return EnumerableMdp(
        num_states=max_state + 1,
        num_actions=header.get("actions", max_action + 1),
        table=table,
        gamma=header["gamma"] if gamma is None else gamma,
        start=header["start"],
    )


def load_mdp(path: str | Path, gamma: float | None = None) -> EnumerableMdp:
    return parse_mdp(Path(path).read_text(encoding="utf-8"), gamma)


def _policy(theta_row: np.ndarray, temperature: float) -> np.ndarray:
    z = np.exp((theta_row - theta_row.max()) / temperature)
    return z / z.sum()


def delta_outcomes(mdp: EnumerableMdp, params, state: int, option: int) -> list[tuple[float, float, int]]:
    """Every ``(probability, delta, action)`` outcome of one step from ``(state, option)``."""
    tau = params.temperature
    pi = _policy(params.theta[state, option], tau)
    out = []
    for a in range(mdp.num_actions):
        if pi[a] == 0.0:
            continue
        q_sa = params.q_u[state, option, a]
        for s2, p, rewards in mdp.table[(state, a)]:
            if mdp.is_terminal(s2):
                boot = 0.0
            else:
                q_opts = np.array([_policy(params.theta[s2, o], tau) @ params.q_u[s2, o]
                                   for o in range(params.num_options)])
                beta = 1.0 / (1.0 + math.exp(-params.nu[s2, option]))
                boot = (1.0 - beta) * q_opts[option] + beta * q_opts.max()
            for r, pr in rewards:
                out.append((pi[a] * p * pr, r + mdp.gamma * boot - q_sa, a))
    if len(out) > MAX_OUTCOMES:
        raise InvalidInputError(f"{len(out)} outcomes exceed the enumeration limit {MAX_OUTCOMES}")
    return out


def exact_delta_moments(mdp: EnumerableMdp, params, state: int, option: int) -> tuple[float, float]:
    """``(E[delta], E[delta^2])`` at ``(state, option)`` by full enumeration."""
    outs = delta_outcomes(mdp, params, state, option)
    m1 = sum(w * d for w, d, _ in outs)
    m2 = sum(w * d * d for w, d, _ in outs)
    return float(m1), float(m2)


def finite_difference(objective: Callable[[np.ndarray], float], table: np.ndarray, entry,
                      step: float = 1e-5) -> float:
    """Central difference of ``objective(table)`` along ``table[entry]``.

    The table is perturbed in place and restored before returning.
    """
    if not step > 0:
        raise InvalidInputError("step must be positive")
    original = table[entry]
    try:
        table[entry] = original + step
        hi = objective(table)
        table[entry] = original - step
        lo = objective(table)
    finally:
        table[entry] = original
    if not (math.isfinite(hi) and math.isfinite(lo)):
        raise NumericError(f"objective not finite around entry {entry}")
    return (hi - lo) / (2.0 * step)


def chain_value_oracle(reward: float, gamma: float, length: int) -> float:
    """Discounted return of a deterministic chain of ``length`` steps that
    pays ``reward`` on the last step only."""
    if not 0.0 <= gamma < 1.0:
        raise InvalidInputError(f"gamma must lie in [0, 1), got {gamma}")
    if length < 1:
        raise InvalidInputError("length must be >= 1")
    return gamma ** (length - 1) * reward
