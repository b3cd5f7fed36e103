"""The optimization loop for HiBO and its baselines.

Every iteration of the tree-guided kinds does three things: fit the local
GP and rebuild the partition tree, score trust-region (or global) candidates
with partition-weighted acquisition values, then evaluate the argmax and
update the trust-region and tree-depth counters.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

import numpy as np

from .benchmarks import EmbeddedBenchmark, make_benchmark, perturb_effective_dims
from .config import AlgorithmKind, RunConfig
from .core import HistoryDataset, Observation, SearchSpace, initial_sample
from .local_optimizer import (
    CandidateBatch,
    TrustRegionState,
    gp_generate_candidates,
    tr_generate_candidates,
    tr_init,
    tr_update,
)
from .navigator import (
    NavigatorState,
    PartitionTree,
    adapt_depth,
    build_tree,
    greedy_leaf,
    partition_scores,
    shift_depth,
)
from .objective_io import ExternalObjective
from .surrogate import GpHyperparams, GpModel, fit_gp

# stream ids for seed derivation
_INIT, _GP, _CAND, _TREE, _RANDOM, _GRID = range(6)


class Objective(Protocol):
    space: SearchSpace

    def __call__(self, iteration: int, point: np.ndarray) -> Observation: ...


class SyntheticObjective:
    def __init__(self, bench: EmbeddedBenchmark, record_timing: bool = False):
        self.bench = bench
        self.space = bench.space
        self.record_timing = record_timing

    def __call__(self, iteration: int, point: np.ndarray) -> Observation:
        t0 = time.perf_counter()
        value = self.bench.evaluate(point)
        secs = time.perf_counter() - t0 if self.record_timing else 0.0
        return Observation(np.asarray(point, dtype=float).copy(), value, False, secs, iteration)


def make_objective(config: RunConfig) -> Objective:
    if config.external is not None:
        return ExternalObjective(config.external)
    bench = make_benchmark(config.benchmark, config.total_dim, config.effective_dim)
    if config.permute_seed is not None:
        bench = perturb_effective_dims(bench, config.permute_seed)
    return SyntheticObjective(bench, config.record_timing)


# --------------------------------------------------------------------------
# acquisition weighting and selection
# --------------------------------------------------------------------------


def weighted_acquisition(raw_acq, leaf_ids, scores: dict[int, float]) -> np.ndarray:
    """Shift raw values to be nonnegative, then scale by each candidate's leaf score."""
    raw_acq = np.asarray(raw_acq, dtype=float)
    leaf_ids = np.asarray(leaf_ids)
    if raw_acq.shape != leaf_ids.shape:
        raise ValueError("raw_acq and leaf_ids must have the same length")
    if raw_acq.size == 0:
        return raw_acq.copy()
    shift = min(float(raw_acq.min()), 0.0)
    weights = np.array([scores[int(i)] for i in leaf_ids])
    return (raw_acq - shift) * weights


def select_next(acq) -> int:
    """Index of the largest value; the first one wins ties."""
    acq = np.asarray(acq, dtype=float)
    if acq.size == 0:
        raise ValueError("cannot select from an empty batch")
    return int(np.argmax(acq))


# --------------------------------------------------------------------------
# run state
# --------------------------------------------------------------------------


@dataclass
class TraceRecord:
    iteration: int
    raw_point: np.ndarray
    value: float
    failed: bool
    best_so_far: float
    regret: float | None
    tree_depth: int | None
    n_leaves: int | None
    tr_length: float | None
    optim_seconds: float
    eval_seconds: float


@dataclass
class StepContext:
    """Everything computed in Step 1 for one proposal."""

    kind: AlgorithmKind
    model: GpModel
    tree: PartitionTree | None
    scores: dict[int, float] | None
    tau: float
    cp: float

    def acquisition(self, points, seed, best: float | None = None) -> np.ndarray:
        """The kind's acquisition (partition-weighted for HiBO kinds) at ``points``."""
        if self.kind in (AlgorithmKind.HIBO_GP, AlgorithmKind.GP_BO):
            raw = self.model.expected_improvement(points, best)
        else:
            raw = self.model.thompson_sample(points, seed)
        if self.kind in (AlgorithmKind.HIBO, AlgorithmKind.HIBO_GP):
            return weighted_acquisition(raw, self.tree.assign(points), self.scores)
        return raw


@dataclass
class RunResult:
    dataset: HistoryDataset
    trace: list[TraceRecord]
    n_restarts: int


class Optimizer:
    """Sequential optimizer for one configured algorithm kind.

    ``dataset`` holds every evaluation; ``local`` indexes the observations of
    the current restart, which are what the GP and trust region see.
    """

    def __init__(self, config: RunConfig, objective: Objective | None = None,
                 on_context: Callable[[int, StepContext, "Optimizer"], None] | None = None):
        self.config = config.validate()
        self.kind = AlgorithmKind(config.algorithm)
        self.objective = objective if objective is not None else make_objective(config)
        self.space = self.objective.space
        self.bench = getattr(self.objective, "bench", None)
        self.dim = self.space.dim
        self.dataset = HistoryDataset(self.dim)
        self.trace: list[TraceRecord] = []
        self.local: list[int] = []
        self.tr: TrustRegionState | None = None
        self.nav = NavigatorState.initial(config.navigator) if self.kind.uses_tree else None
        self.n_restarts = 0
        self.on_context = on_context
        self._warm: GpHyperparams | None = None
        self._random_rng = np.random.default_rng([config.seed, _RANDOM])

    # -- helpers -----------------------------------------------------------

    def _seed(self, stream: int, *keys: int) -> list[int]:
        return [self.config.seed, stream, *keys]

    @property
    def remaining(self) -> int:
        return self.config.budget - len(self.dataset)

    @property
    def local_X(self) -> np.ndarray:
        return self.dataset.X[self.local]

    @property
    def local_y(self) -> np.ndarray:
        return self.dataset.y[self.local]

    def _evaluate(self, point: np.ndarray, optim_seconds: float = 0.0,
                  ctx: StepContext | None = None) -> Observation:
        point = np.clip(np.asarray(point, dtype=float), 0.0, 1.0)
        obs = self.objective(len(self.dataset), point)
        self.dataset.append(obs)
        self.local.append(len(self.dataset) - 1)
        best = self.dataset.best_value
        tree = ctx.tree if ctx is not None else None
        self.trace.append(TraceRecord(
            iteration=obs.iteration,
            raw_point=self.space.denormalize(obs.point),
            value=float(obs.value),
            failed=bool(obs.failed),
            best_so_far=float(best),
            regret=self.bench.regret(best) if self.bench is not None else None,
            tree_depth=None if ctx is None else (tree.depth if tree is not None else 1),
            n_leaves=None if ctx is None else (tree.n_leaves if tree is not None else 1),
            tr_length=self.tr.base_length if (ctx is not None and self.tr is not None) else None,
            optim_seconds=optim_seconds if self.config.record_timing else 0.0,
            eval_seconds=float(obs.eval_seconds),
        ))
        return obs

    def _initial_batch(self) -> None:
        """Fresh Latin-hypercube batch (capped by the remaining budget)."""
        n = min(self.config.init_samples, self.remaining)
        self.local = []
        if n <= 0:
            return
        if self.kind is AlgorithmKind.RANDOM:
            pts = self._random_rng.uniform(size=(n, self.dim))
        else:
            pts = initial_sample(self.dim, n, self._seed(_INIT, self.n_restarts))
        for p in pts:
            self._evaluate(p)
        if self.kind.uses_trust_region:
            self.tr = tr_init(self.local_X, self.local_y, self.config.trust_region)
        self._warm = None

    def _restart(self) -> None:
        self.n_restarts += 1
        if self.nav is not None and (self.nav.needs_restart or self.config.restart_resets_depth):
            cfg = self.config.navigator
            self.nav = NavigatorState(max_depth=cfg.restart_depth, config=cfg)
        if not self.kind.uses_trust_region:
            # a global GP has no local state to abandon: only the depth resets
            return
        self._initial_batch()

    # -- the step ----------------------------------------------------------

    def prepare(self) -> StepContext:
        """Step 1: fit the GP on the restart's data and build the tree on all data."""
        it = len(self.dataset)
        model = fit_gp(self.local_X, self.local_y, self.config.surrogate,
                       seed=self._seed(_GP, it), init=self._warm)
        self._warm = model.hyperparams
        tree = scores = None
        nav_cfg = self.config.navigator
        if self.kind.uses_tree:
            tree = build_tree(self.dataset.X, self.dataset.y, self.nav, self._seed(_TREE, it))
            scores = partition_scores(tree, nav_cfg.cp, nav_cfg.tau)
        return StepContext(self.kind, model, tree, scores, nav_cfg.tau, nav_cfg.cp)

    def _candidates(self, ctx: StepContext, *keys: int) -> CandidateBatch:
        it = len(self.dataset)
        n = self.config.resolved_n_candidates
        if self.kind.uses_trust_region:
            return tr_generate_candidates(self.tr, ctx.model, n, self._seed(_CAND, it, *keys))
        return gp_generate_candidates(ctx.model, n, float(self.local_y.max()),
                                      self._seed(_CAND, it, *keys))

    def propose(self, ctx: StepContext) -> np.ndarray:
        """Step 2: candidates, (weighted) acquisition, argmax."""
        kind = self.kind
        if kind is AlgorithmKind.RESTRICTED:
            return self._propose_restricted(ctx)
        batch = self._candidates(ctx)
        acq = batch.raw_acq
        if kind in (AlgorithmKind.HIBO, AlgorithmKind.HIBO_GP):
            acq = weighted_acquisition(acq, ctx.tree.assign(batch.points), ctx.scores)
        return batch.points[select_next(acq)]

    def _propose_restricted(self, ctx: StepContext) -> np.ndarray:
        """Sample only inside the greedy-UCT leaf, with plain acquisition values."""
        target = greedy_leaf(ctx.tree, ctx.cp)
        batch = None
        for attempt in range(max(self.config.restricted_retries, 1)):
            keys = () if attempt == 0 else (attempt,)
            batch = self._candidates(ctx, *keys)
            keep = ctx.tree.assign(batch.points) == target
            if keep.any():
                batch = CandidateBatch(batch.points[keep], batch.raw_acq[keep], batch.source)
                break
        return batch.points[select_next(batch.raw_acq)]

    def step(self) -> Observation:
        """One full iteration: Steps 1 to 3 plus counter updates and restarts."""
        if self.kind is AlgorithmKind.RANDOM:
            t0 = time.perf_counter()
            p = self._random_rng.uniform(size=self.dim)
            return self._evaluate(p, time.perf_counter() - t0)
        t0 = time.perf_counter()
        ctx = self.prepare()
        if self.on_context is not None:
            self.on_context(len(self.dataset), ctx, self)
        point = self.propose(ctx)
        optim = time.perf_counter() - t0
        prev_best = float(self.local_y.max())
        obs = self._evaluate(point, optim, ctx)
        improved = float(obs.value) > prev_best
        old_length = self.tr.base_length if self.tr is not None else None
        if self.tr is not None:
            self.tr = tr_update(self.tr, improved)
            self.tr = replace(self.tr, center=self.local_X[int(np.argmax(self.local_y))].copy())
        if self.nav is not None:
            if self.nav.config.coupled and self.tr is not None:
                # depth follows trust-region resizes: shrink -> deeper, grow -> shallower
                delta = int(np.sign(old_length - self.tr.base_length))
                self.nav = shift_depth(self.nav, delta)
            else:
                self.nav = adapt_depth(self.nav, improved)
        if (self.tr is not None and self.tr.needs_restart) or (
                self.nav is not None and self.nav.needs_restart):
            self._restart()
        return obs

    def run(self) -> RunResult:
        """Initial sampling, then steps until the evaluation budget is spent."""
        if not self.dataset.observations:
            self._initial_batch()
        while self.remaining > 0:
            self.step()
        check_trace(self.trace, self.config.budget)
        return RunResult(self.dataset, self.trace, self.n_restarts)


def check_trace(trace: list[TraceRecord], budget: int) -> None:
    if len(trace) != budget:
        raise AssertionError(f"trace has {len(trace)} rows, expected {budget}")
    best = np.array([r.best_so_far for r in trace])
    if np.any(np.diff(best) < 0):
        raise AssertionError("best_so_far decreased")
    regrets = [r.regret for r in trace if r.regret is not None]
    if regrets and np.any(np.diff(regrets) > 1e-12):
        raise AssertionError("regret increased")


def run(config: RunConfig, objective: Objective | None = None, **kwargs) -> RunResult:
    return Optimizer(config, objective, **kwargs).run()
