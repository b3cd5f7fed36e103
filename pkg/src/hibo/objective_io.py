"""External black-box objectives over a line-delimited JSON protocol.

One process is spawned per evaluation.  It receives a single UTF-8 line on
stdin::

    {"iteration": 3, "params": {"buffer_mb": 512.0, "workers": 4.0}}

and must answer with one line on stdout::

    {"objective": 1234.5, "failed": false, "eval_seconds": 12.3}

Unknown reply keys are ignored.  A nonzero exit status, a malformed reply or
a timeout yields a failed observation carrying the penalty value.
"""

from __future__ import annotations

import json
import math
import subprocess
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Observation, SearchSpace


class ConfigurationError(RuntimeError):
    """The worker command could not be started at all."""


@dataclass(frozen=True)
class ExternalObjectiveSpec:
    command: tuple[str, ...]
    params: tuple[tuple[str, float, float], ...]
    timeout: float = 60.0
    failure_penalty_value: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "ExternalObjectiveSpec":
        params = tuple((str(p["name"]), float(p["lower"]), float(p["upper"]))
                       for p in d["params"])
        return cls(command=tuple(str(c) for c in d["command"]), params=params,
                   timeout=float(d.get("timeout", 60.0)),
                   failure_penalty_value=float(d.get("failure_penalty_value", 0.0)))

    def to_dict(self) -> dict:
        return {
            "command": list(self.command),
            "params": [{"name": n, "lower": lo, "upper": hi} for n, lo, hi in self.params],
            "timeout": self.timeout,
            "failure_penalty_value": self.failure_penalty_value,
        }

    @property
    def space(self) -> SearchSpace:
        return SearchSpace.from_bounds([p[1] for p in self.params], [p[2] for p in self.params],
                                       names=[p[0] for p in self.params])

    def check_space(self, space: SearchSpace) -> None:
        if [p[0] for p in self.params] != space.names:
            raise ValueError("parameter manifest does not match the search space")


def encode_request(iteration: int, params: dict[str, float]) -> bytes:
    return (json.dumps({"iteration": int(iteration),
                        "params": {k: float(v) for k, v in params.items()}}) + "\n").encode("utf-8")


def decode_reply(line: str) -> tuple[float, bool, float]:
    """Parse a reply line into ``(objective, failed, eval_seconds)``.

    Raises ValueError on anything malformed.
    """
    reply = json.loads(line)
    if not isinstance(reply, dict):
        raise ValueError("reply is not an object")
    obj, failed, secs = reply["objective"], reply["failed"], reply["eval_seconds"]
    if not isinstance(failed, bool):
        raise ValueError("'failed' must be a boolean")
    for v in (obj, secs):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValueError("'objective' and 'eval_seconds' must be numbers")
    if not math.isfinite(obj) or not math.isfinite(secs) or secs < 0:
        raise ValueError("non-finite objective or invalid eval_seconds")
    return float(obj), failed, float(secs)


def evaluate_external(spec: ExternalObjectiveSpec, iteration: int,
                      point_raw: Sequence[float], point: np.ndarray | None = None) -> Observation:
    """Run one evaluation of the external worker at raw coordinates.

    ``point`` is the unit-cube form stored in the observation; it is derived
    from ``point_raw`` when omitted.
    """
    names = [p[0] for p in spec.params]
    if len(point_raw) != len(names):
        raise ValueError("point length does not match the parameter manifest")
    if point is None:
        point = spec.space.normalize(np.asarray(point_raw, dtype=float))
    request = encode_request(iteration, dict(zip(names, point_raw)))
    start = time.perf_counter()
    try:
        proc = subprocess.run(list(spec.command), input=request, capture_output=True,
                              timeout=spec.timeout)
    except subprocess.TimeoutExpired:
        return _failed(spec, point, iteration, time.perf_counter() - start)
    except OSError as exc:
        raise ConfigurationError(f"cannot start worker {spec.command!r}: {exc}") from exc
    wall = time.perf_counter() - start
    if proc.returncode != 0:
        return _failed(spec, point, iteration, wall)
    try:
        line = proc.stdout.decode("utf-8").splitlines()[0]
        value, failed, secs = decode_reply(line)
    except (IndexError, UnicodeDecodeError, ValueError, KeyError, TypeError):
        return _failed(spec, point, iteration, wall)
    if failed:
        return Observation(point, spec.failure_penalty_value, True, secs, iteration)
    return Observation(point, value, False, secs, iteration)


def _failed(spec, point, iteration, wall) -> Observation:
    return Observation(point, spec.failure_penalty_value, True, float(wall), iteration)


class ExternalObjective:
    """Callable objective wrapping `evaluate_external` on unit-cube points."""

    def __init__(self, spec: ExternalObjectiveSpec):
        self.spec = spec
        self.space = spec.space

    def __call__(self, iteration: int, point: np.ndarray) -> Observation:
        raw = np.clip(self.space.denormalize(point), self.space.lower, self.space.upper)
        return evaluate_external(self.spec, iteration, raw.tolist(), point=np.asarray(point))


@dataclass(frozen=True)
class SPitrInputs:
    improvement: float
    tuning_seconds: float
    n_failed: int
    penalty_seconds: float


def s_pitr(improvement: float, tuning_seconds: float, n_failed: int,
           penalty_seconds: float) -> float:
    """Safety-weighted improvement/time ratio ``PI / (TT + NF * PE)``."""
    if tuning_seconds < 0 or n_failed < 0 or penalty_seconds < 0:
        raise ValueError("tuning time, failure count and penalty must be nonnegative")
    denom = tuning_seconds + n_failed * penalty_seconds
    if denom <= 0:
        raise ValueError("S-PITR denominator must be positive")
    return improvement / denom
