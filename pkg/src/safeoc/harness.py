"""Multi-trial training, greedy evaluation and output files."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig
from .core import Rng
from .envs import ACTION_LETTERS, CartPoleEnv, FourRoomsEnv, GridMap, TileCoder, default_map, load_map
from .envs.cartpole import default_coder
from .envs.gridmap import FROZEN, GOAL, WALL, parse_map
from .learner import LearnerConfig, run_episode
from .model import OptionParameters, option_value_list, rows

log = logging.getLogger(__name__)

CURVE_HEADER = ("trial", "episode", "discounted_return", "steps", "frozen_visits")
AGG_HEADER = ("episode", "mean", "std")
# evaluation trial t of a run seeded s draws from Rng(s + EVAL_SEED_OFFSET + t)
EVAL_SEED_OFFSET = 2**31
GREEDY_TEMPERATURE = 0.001
OPTION_SYMBOLS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class LearningCurveRow:
    trial: int
    episode: int
    discounted_return: float
    steps: int
    frozen_visits: int


@dataclass
class TrialResult:
    trial: int
    rows: list[LearningCurveRow]
    params: OptionParameters


@dataclass
class EvalResult:
    returns: list[float]
    steps: list[int]
    frozen_visits: int
    visits: np.ndarray | None = None


@dataclass
class RunArtifacts:
    config: ExperimentConfig
    rows: list[LearningCurveRow]
    aggregate: list[tuple[int, float, float]]
    params: list[OptionParameters]
    evaluations: list[EvalResult] = field(default_factory=list)
    visits: np.ndarray | None = None
    policy: str | None = None


def make_env(config: ExperimentConfig):
    if config.env == "fourrooms":
        grid = load_map(config.map_path) if config.map_path else default_map()
        return FourRoomsEnv(grid, slip_prob=config.slip_prob, step_cap=config.effective_step_cap)
    base = default_coder()
    coder = TileCoder(base.bins, base.low, base.high, tilings=config.tilings)
    return CartPoleEnv(step_cap=config.effective_step_cap, coder=coder)


def env_meta(config: ExperimentConfig, env) -> dict:
    meta = {
        "env": config.env,
        "step_cap": env.step_cap,
        "gamma": config.learner.gamma,
        "psi": config.learner.psi,
        "base_seed": config.base_seed,
    }
    if config.env == "fourrooms":
        meta["map"] = env.map.render()
        meta["slip_prob"] = env.slip_prob
    else:
        c = env.coder
        meta["coder"] = {"bins": list(c.bins), "low": list(c.low), "high": list(c.high), "tilings": c.tilings}
    return meta


def env_from_meta(meta: dict):
    if meta["env"] == "fourrooms":
        return FourRoomsEnv(parse_map(meta["map"]), slip_prob=meta["slip_prob"], step_cap=meta["step_cap"])
    c = meta["coder"]
    coder = TileCoder(tuple(c["bins"]), tuple(c["low"]), tuple(c["high"]), c["tilings"])
    return CartPoleEnv(step_cap=meta["step_cap"], coder=coder)


def train_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    """Train one agent from scratch with seed ``base_seed + trial``."""
    env = make_env(config)
    rng = Rng(config.base_seed + trial)
    params = config.learner.new_params(env.num_features, env.num_actions)
    out = []
    for episode in range(config.episodes):
        rec = run_episode(env, params, config.learner, rng, config.effective_step_cap)
        out.append(LearningCurveRow(trial, episode, rec.discounted_return, rec.steps, rec.frozen_visits))
    return TrialResult(trial, out, params)


def aggregate(rows_: list[LearningCurveRow], episodes: int) -> list[tuple[int, float, float]]:
    """Per-episode mean and (population) std of the discounted return across trials."""
    by_trial: dict[int, list[float]] = {}
    for r in sorted(rows_, key=lambda r: (r.trial, r.episode)):
        by_trial.setdefault(r.trial, [0.0] * episodes)[r.episode] = r.discounted_return
    table = np.array([by_trial[t] for t in sorted(by_trial)])
    return [(e, float(table[:, e].mean()), float(table[:, e].std())) for e in range(episodes)]


def evaluate_greedy(params: OptionParameters, env, config: LearnerConfig, eval_trials: int, rng: Rng,
                    temperature: float = GREEDY_TEMPERATURE) -> EvalResult:
    """Run ``eval_trials`` episodes with near-greedy policies and no learning.

    Visit counts tally the state entered at every step, so they sum to the
    total number of evaluation steps.
    """
    frozen = replace(params, temperature=temperature) if params.temperature != temperature else params
    grid = env.map if getattr(env, "tracks_visits", False) else None
    visits = np.zeros((grid.height, grid.width), dtype=np.int64) if grid is not None else None
    result = EvalResult([], [], 0, visits)
    for _ in range(eval_trials):
        rec = run_episode(env, frozen, config, rng, learn=False)
        result.returns.append(rec.discounted_return)
        result.steps.append(rec.steps)
        result.frozen_visits += rec.frozen_visits
        if visits is not None:
            for state, n in rec.visits.items():
                visits[divmod(state, grid.width)] += n
    return result


def greedy_choices(params: OptionParameters, phi) -> tuple[int, int]:
    """(greedy option, greedy action of that option) at ``phi``."""
    q = option_value_list(params, phi)
    option = int(np.argmax(q))
    action = int(np.argmax(rows(params.theta, phi)[option]))
    return option, action


def render_policy(params: OptionParameters, grid: GridMap) -> str:
    """Two grids, separated by a blank line: greedy action letters (U/D/L/R)
    and greedy option ids. Walls, goal and frozen cells print as ``#``,
    ``G`` and ``F`` in both."""
    actions, options = [], []
    for r, row in enumerate(grid.rows):
        a_line, o_line = [], []
        for c, kind in enumerate(row):
            if kind in (WALL, GOAL, FROZEN):
                a_line.append(kind)
                o_line.append(kind)
                continue
            option, action = greedy_choices(params, (r * grid.width + c,))
            a_line.append(ACTION_LETTERS[action])
            o_line.append(OPTION_SYMBOLS[option])
        actions.append("".join(a_line))
        options.append("".join(o_line))
    return "\n".join(actions) + "\n\n" + "\n".join(options) + "\n"


def run_experiment(config: ExperimentConfig, write: bool = True) -> RunArtifacts:
    trials = range(config.trials)
    if config.workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(train_trial, [config] * config.trials, trials))
    else:
        results = []
        for t in trials:
            results.append(train_trial(config, t))
            log.info("trial %d done", t)
    results.sort(key=lambda r: r.trial)
    all_rows = [row for r in results for row in r.rows]
    params = [r.params for r in results]
    art = RunArtifacts(config, all_rows, aggregate(all_rows, config.episodes), params)

    env = make_env(config)
    if config.eval_trials:
        for r in results:
            rng = Rng(config.base_seed + EVAL_SEED_OFFSET + r.trial)
            art.evaluations.append(evaluate_greedy(r.params, env, config.learner, config.eval_trials, rng))
        if config.env == "fourrooms":
            art.visits = sum(e.visits for e in art.evaluations)
    if config.env == "fourrooms":
        art.policy = render_policy(params[0], env.map)
    if write:
        write_outputs(art, env)
    return art


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_curves(path: Path, rows_: list[LearningCurveRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for r in rows_:
            w.writerow([r.trial, r.episode, _fmt(r.discounted_return), r.steps, r.frozen_visits])


def write_aggregate(path: Path, agg) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_HEADER)
        for e, m, s in agg:
            w.writerow([e, _fmt(m), _fmt(s)])


def write_grid(path: Path, grid: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in grid:
            w.writerow([int(x) for x in row])


def write_eval_returns(path: Path, evaluations: list[EvalResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("trial", "episode", "discounted_return", "steps"))
        for t, ev in enumerate(evaluations):
            for i, (ret, steps) in enumerate(zip(ev.returns, ev.steps)):
                w.writerow([t, i, _fmt(ret), steps])


def write_outputs(art: RunArtifacts, env) -> Path:
    out = Path(art.config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_curves(out / "curves.csv", art.rows)
        write_aggregate(out / "curves_agg.csv", art.aggregate)
        if art.visits is not None:
            write_grid(out / "visits.csv", art.visits)
        if art.evaluations:
            write_eval_returns(out / "eval_returns.csv", art.evaluations)
        if art.policy is not None:
            (out / "policy.txt").write_text(art.policy, encoding="utf-8")
        save_checkpoint(out / "checkpoint.npz", art.params, env_meta(art.config, env))
    except OSError as exc:
        raise OSError(f"failed writing outputs to {exc.filename or out}: {exc.strerror}") from exc
    return out


def evaluate_checkpoint(path: str | Path, eval_trials: int, out_dir: str | Path | None = None,
                        seed: int | None = None) -> list[EvalResult]:
    params, meta = load_checkpoint(path)
    env = env_from_meta(meta)
    learner = LearnerConfig(gamma=meta["gamma"], temperature=params[0].temperature,
                            num_options=params[0].num_options)
    base = meta.get("base_seed", 0) if seed is None else seed
    results = [
        evaluate_greedy(p, env, learner, eval_trials, Rng(base + EVAL_SEED_OFFSET + t))
        for t, p in enumerate(params)
    ]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_eval_returns(out / "eval_returns.csv", results)
        if results[0].visits is not None:
            write_grid(out / "visits.csv", sum(r.visits for r in results))
    return results
