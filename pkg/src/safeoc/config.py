"""Experiment configuration files.

One ``key = value`` per line; blank lines and ``#`` comments are ignored.
Recognised keys (``env`` is required, everything else has a default):

=============  ========  ==================================================
key            type      meaning
=============  ========  ==================================================
env            str       ``fourrooms`` or ``cartpole``
map            path      four-rooms map file (default: bundled layout)
psi            float     controllability weight, >= 0
gamma          float     discount factor in [0, 1]
alpha          float     critic step size
alpha_theta    float     intra-option policy step size
alpha_nu       float     termination step size
temperature    float     Boltzmann temperature
options        int       number of options
episodes       int       training episodes per trial
trials         int       independent trials
seed           int       base seed; trial t uses seed + t
eval_trials    int       greedy evaluation episodes per trained agent
step_cap       int       episode step limit (default 500 / 200)
slip_prob      float     four-rooms random-action probability
tilings        int       cart-pole tile-coder tilings
workers        int       worker processes for trials
out            path      output directory
=============  ========  ==================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .learner import LearnerConfig

ENVS = ("fourrooms", "cartpole")
DEFAULT_STEP_CAP = {"fourrooms": 500, "cartpole": 200}

_KEYS = {
    "env": str,
    "map": str,
    "psi": float,
    "gamma": float,
    "alpha": float,
    "alpha_theta": float,
    "alpha_nu": float,
    "temperature": float,
    "options": int,
    "episodes": int,
    "trials": int,
    "seed": int,
    "eval_trials": int,
    "step_cap": int,
    "slip_prob": float,
    "tilings": int,
    "workers": int,
    "out": str,
}


@dataclass(frozen=True)
class ExperimentConfig:
    env: str
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    map_path: str | None = None
    episodes: int = 600
    trials: int = 1
    base_seed: int = 0
    eval_trials: int = 80
    step_cap: int | None = None
    slip_prob: float = 0.2
    tilings: int = 1
    workers: int = 1
    out_dir: str = "runs/latest"

    def __post_init__(self):
        if self.env not in ENVS:
            raise ConfigError("env", f"must be one of {ENVS}, got {self.env!r}")
        for key, value in (("episodes", self.episodes), ("trials", self.trials), ("workers", self.workers),
                           ("tilings", self.tilings)):
            if value < 1:
                raise ConfigError(key, f"must be >= 1, got {value}")
        if self.eval_trials < 0:
            raise ConfigError("eval_trials", f"must be >= 0, got {self.eval_trials}")
        if self.base_seed < 0:
            raise ConfigError("seed", f"must be >= 0, got {self.base_seed}")
        if self.step_cap is not None and self.step_cap < 1:
            raise ConfigError("step_cap", f"must be >= 1, got {self.step_cap}")
        if not 0.0 <= self.slip_prob <= 1.0:
            raise ConfigError("slip_prob", f"must lie in [0, 1], got {self.slip_prob}")

    @property
    def effective_step_cap(self) -> int:
        return self.step_cap if self.step_cap is not None else DEFAULT_STEP_CAP[self.env]


def _convert(key: str, raw):
    kind = _KEYS[key]
    if isinstance(raw, kind) and not isinstance(raw, bool):
        return raw
    try:
        if kind is int:
            return int(str(raw).strip())
        if kind is float:
            return float(str(raw).strip())
    except ValueError:
        raise ConfigError(key, f"malformed {kind.__name__} value {raw!r}") from None
    return str(raw).strip()


def read_config_file(path: str | Path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
        values[key] = _convert(key, raw)
    return values


def _check_range(key: str, value) -> None:
    if key == "gamma":
        ok, bound = 0.0 <= value <= 1.0, "in [0, 1]"
    elif key == "psi":
        ok, bound = value >= 0.0, ">= 0"
    elif key == "options":
        ok, bound = value >= 1, ">= 1"
    else:
        ok, bound = value > 0.0, "> 0"
    if not ok:
        raise ConfigError(key, f"value {value} out of range, must be {bound}")


def config_from_values(values: dict) -> ExperimentConfig:
    for key in values:
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
    v = {k: _convert(k, raw) for k, raw in values.items()}
    if "env" not in v:
        raise ConfigError("env", "missing required key")
    d = LearnerConfig()
    learner_values = {
        "psi": v.get("psi", d.psi),
        "gamma": v.get("gamma", d.gamma),
        "alpha": v.get("alpha", d.alpha_critic),
        "alpha_theta": v.get("alpha_theta", d.alpha_theta),
        "alpha_nu": v.get("alpha_nu", d.alpha_nu),
        "temperature": v.get("temperature", d.temperature),
        "options": v.get("options", d.num_options),
    }
    for key, value in learner_values.items():
        _check_range(key, value)
    learner = LearnerConfig(
        psi=learner_values["psi"],
        gamma=learner_values["gamma"],
        alpha_critic=learner_values["alpha"],
        alpha_theta=learner_values["alpha_theta"],
        alpha_nu=learner_values["alpha_nu"],
        temperature=learner_values["temperature"],
        num_options=learner_values["options"],
    )
    kwargs = dict(env=v["env"], learner=learner)
    renames = {"map": "map_path", "seed": "base_seed", "out": "out_dir"}
    for key in ("map", "episodes", "trials", "seed", "eval_trials", "step_cap", "slip_prob", "tilings",
                "workers", "out"):
        if key in v:
            kwargs[renames.get(key, key)] = v[key]
    return ExperimentConfig(**kwargs)


def parse_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    """Read ``path`` (if given) and apply ``overrides``; ``None`` overrides are ignored."""
    values = read_config_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return config_from_values(values)
