"""Trust-region (TuRBO-1 style) and plain GP-BO candidate generation."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .surrogate import GpModel


class CandidateSource(str, Enum):
    TRUST_REGION = "trust_region"
    GLOBAL = "global"


@dataclass(frozen=True)
class CandidateBatch:
    points: np.ndarray
    raw_acq: np.ndarray
    source: CandidateSource

    def __post_init__(self):
        if self.points.shape[0] != self.raw_acq.shape[0]:
            raise ValueError("points and raw_acq lengths differ")

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class TrustRegionConfig:
    length_init: float = 0.8
    min_length: float = 0.03125
    max_length: float = 1.6
    success_threshold: int = 3
    failure_threshold: int = 5


@dataclass(frozen=True)
class TrustRegionState:
    center: np.ndarray
    base_length: float
    success_threshold: int = 3
    failure_threshold: int = 5
    min_length: float = 0.03125
    max_length: float = 1.6
    success_count: int = 0
    failure_count: int = 0
    needs_restart: bool = False


def default_n_candidates(dim: int) -> int:
    return min(100 * dim, 5000)


def tr_init(X, y, config: TrustRegionConfig = TrustRegionConfig()) -> TrustRegionState:
    """Fresh trust region centred on the best point of ``(X, y)``."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("trust region needs at least one observation")
    center = np.asarray(X, dtype=float)[int(np.argmax(y))].copy()
    return TrustRegionState(
        center=center,
        base_length=config.length_init,
        success_threshold=config.success_threshold,
        failure_threshold=config.failure_threshold,
        min_length=config.min_length,
        max_length=config.max_length,
    )


def tr_update(state: TrustRegionState, improved: bool) -> TrustRegionState:
    """Advance the success/failure counters and resize the region."""
    length = state.base_length
    if improved:
        succ, fail = state.success_count + 1, 0
    else:
        succ, fail = 0, state.failure_count + 1
    if succ >= state.success_threshold:
        length, succ = min(2.0 * length, state.max_length), 0
    elif fail >= state.failure_threshold:
        length, fail = length / 2.0, 0
    return replace(state, base_length=length, success_count=succ, failure_count=fail,
                   needs_restart=state.needs_restart or length < state.min_length)


def tr_bounds(state: TrustRegionState, lengthscales) -> tuple[np.ndarray, np.ndarray]:
    """Box of the trust region, with side lengths shaped by the lengthscales."""
    ls = np.asarray(lengthscales, dtype=float)
    weights = ls / np.exp(np.mean(np.log(ls)))
    half = 0.5 * state.base_length * weights
    lb = np.clip(state.center - half, 0.0, 1.0)
    ub = np.clip(state.center + half, 0.0, 1.0)
    return lb, ub


def tr_generate_candidates(state: TrustRegionState, model: GpModel, n_cand: int,
                           seed) -> CandidateBatch:
    """Perturb the centre inside the trust region and Thompson-sample the result.

    Each coordinate is perturbed with probability ``min(20/d, 1)`` and every
    candidate has at least one perturbed coordinate.
    """
    ss = np.random.SeedSequence(seed)
    cand_seed, ts_seed = ss.spawn(2)
    rng = np.random.default_rng(cand_seed)
    d = state.center.shape[0]
    lb, ub = tr_bounds(state, model.hyperparams.lengthscales)
    pert = lb + (ub - lb) * rng.random((n_cand, d))
    mask = rng.random((n_cand, d)) <= min(20.0 / d, 1.0)
    empty = ~mask.any(axis=1)
    if empty.any():
        mask[np.flatnonzero(empty), rng.integers(0, d, size=int(empty.sum()))] = True
    points = np.where(mask, pert, state.center[None, :])
    raw = model.thompson_sample(points, ts_seed)
    return CandidateBatch(points, raw, CandidateSource.TRUST_REGION)


def gp_generate_candidates(model: GpModel, n_cand: int, best: float, seed) -> CandidateBatch:
    """Uniform candidates over the whole cube, scored by expected improvement."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    points = rng.random((n_cand, model.dim))
    return CandidateBatch(points, model.expected_improvement(points, best),
                          CandidateSource.GLOBAL)
