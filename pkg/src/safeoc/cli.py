from __future__ import annotations

import argparse
import logging
import sys

from .checkpoint import load_checkpoint
from .config import parse_config
from .envs import load_map, parse_map
from .errors import SafeOCError
from .harness import evaluate_checkpoint, render_policy, run_experiment

_TRAIN_FLAGS = [
    ("--env", "env", str),
    ("--psi", "psi", float),
    ("--gamma", "gamma", float),
    ("--alpha", "alpha", float),
    ("--alpha-theta", "alpha_theta", float),
    ("--alpha-nu", "alpha_nu", float),
    ("--temperature", "temperature", float),
    ("--options", "options", int),
    ("--episodes", "episodes", int),
    ("--trials", "trials", int),
    ("--seed", "seed", int),
    ("--eval-trials", "eval_trials", int),
    ("--step-cap", "step_cap", int),
    ("--workers", "workers", int),
    ("--map", "map", str),
    ("--out", "out", str),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="safeoc", description="Safe option-critic experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train agents and write curves, visits, policy and checkpoint")
    train.add_argument("--config", help="key = value config file")
    for flag, dest, kind in _TRAIN_FLAGS:
        train.add_argument(flag, dest=dest, type=kind, default=None)

    ev = sub.add_parser("eval", help="greedy evaluation of a checkpoint")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--trials", type=int, default=80)
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--out", required=True)

    rp = sub.add_parser("render-policy", help="print the greedy policy of a four-rooms checkpoint")
    rp.add_argument("--checkpoint", required=True)
    rp.add_argument("--map", default=None)
    rp.add_argument("--trial", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "train":
            overrides = {dest: getattr(args, dest) for _, dest, _ in _TRAIN_FLAGS}
            config = parse_config(args.config, overrides)
            art = run_experiment(config)
            last = art.aggregate[-1]
            print(f"wrote {config.out_dir} ({len(art.rows)} rows; final-episode mean return {last[1]:.3f})")
        elif args.command == "eval":
            results = evaluate_checkpoint(args.checkpoint, args.trials, args.out, args.seed)
            n = sum(len(r.returns) for r in results)
            mean = sum(sum(r.returns) for r in results) / n
            frozen = sum(r.frozen_visits for r in results)
            print(f"{n} episodes, mean discounted return {mean:.3f}, frozen visits {frozen}")
        else:
            params, meta = load_checkpoint(args.checkpoint)
            if meta["env"] != "fourrooms":
                raise SafeOCError("render-policy needs a four-rooms checkpoint")
            grid = load_map(args.map) if args.map else parse_map(meta["map"])
            sys.stdout.write(render_policy(params[args.trial], grid))
    except (SafeOCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
