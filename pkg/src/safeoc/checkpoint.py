"""Parameter checkpoints.

A checkpoint is a NumPy ``.npz`` archive with these members:

``format``      the string ``"safeoc-checkpoint"``
``version``     integer format version (currently 1)
``theta``       float64 ``(trials, features, options, actions)``
``nu``          float64 ``(trials, features, options)``
``q_u``         float64 ``(trials, features, options, actions)``
``temperature`` float64 ``(trials,)``
``meta``        JSON string describing how to rebuild the environment
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .model import OptionParameters

FORMAT = "safeoc-checkpoint"
VERSION = 1


def save_checkpoint(path: str | Path, params: list[OptionParameters], meta: dict) -> None:
    if not params:
        raise InvalidInputError("nothing to save")
    with open(path, "wb") as fh:
        np.savez(
            fh,
            format=np.array(FORMAT),
            version=np.array(VERSION),
            theta=np.stack([p.theta for p in params]),
            nu=np.stack([p.nu for p in params]),
            q_u=np.stack([p.q_u for p in params]),
            temperature=np.array([p.temperature for p in params]),
            meta=np.array(json.dumps(meta, sort_keys=True)),
        )


def load_checkpoint(path: str | Path) -> tuple[list[OptionParameters], dict]:
    with np.load(path, allow_pickle=False) as data:
        missing = {"format", "version", "theta", "nu", "q_u", "temperature", "meta"} - set(data.files)
        if missing or str(data["format"]) != FORMAT:
            raise InvalidInputError(f"{path}: not a safeoc checkpoint")
        version = int(data["version"])
        if version != VERSION:
            raise InvalidInputError(f"{path}: unsupported checkpoint version {version}")
        params = [
            OptionParameters(t.copy(), n.copy(), q.copy(), float(tau))
            for t, n, q, tau in zip(data["theta"], data["nu"], data["q_u"], data["temperature"])
        ]
        meta = json.loads(str(data["meta"]))
    return params, meta
