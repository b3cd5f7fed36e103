import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import depth_replay, trust_region_replay
from hibo.config import AlgorithmKind, RunConfig
from hibo.navigator import NavigatorConfig
from hibo.orchestrator import Optimizer, check_trace, run, select_next, weighted_acquisition

SMALL = dict(benchmark="rastrigin", total_dim=6, budget=30, init_samples=8, n_candidates=128)


def cfg(**kw):
    return RunConfig.from_dict({**SMALL, **kw})


def _rows(result):
    return [(r.iteration, tuple(r.raw_point), r.value, r.failed, r.best_so_far, r.regret,
             r.tree_depth, r.n_leaves, r.tr_length) for r in result.trace]


def test_weighted_acquisition_examples():
    np.testing.assert_allclose(weighted_acquisition([2.0, 3.0], [0, 1], {0: 0.9, 1: 0.1}), [1.8, 0.3])
    assert select_next(weighted_acquisition([2.0, 3.0], [0, 1], {0: 0.9, 1: 0.1})) == 0
    raw = np.array([-1.0, 0.5, -3.0, 2.0])
    w = weighted_acquisition(raw, [4, 4, 4, 4], {4: 1.0})
    np.testing.assert_allclose(w, raw + 3.0)
    assert select_next(w) == select_next(raw)
    with pytest.raises(ValueError):
        weighted_acquisition([1.0, 2.0], [0], {0: 1.0})


def test_select_next_ties_and_errors():
    assert select_next([1.0]) == 0
    assert select_next([3.0, 5.0, 5.0, 1.0]) == 1
    with pytest.raises(ValueError):
        select_next([])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=60), st.integers(1, 5),
       st.floats(1e-3, 1e3), st.integers(0, 10_000))
def test_selection_oracle_and_scale_invariance(raw, n_leaves, c, seed):
    rng = np.random.default_rng(seed)
    raw = np.array(raw)
    leaves = rng.integers(0, n_leaves, raw.size)
    p = rng.random(n_leaves) + 1e-3
    scores = {i: float(v) for i, v in enumerate(p / p.sum())}
    w = weighted_acquisition(raw, leaves, scores)
    shifted = raw - min(raw.min(), 0.0)
    oracle = max(range(raw.size), key=lambda i: (shifted[i] * scores[int(leaves[i])], -i))
    assert select_next(w) == oracle
    assert select_next(weighted_acquisition(shifted * c, leaves, scores)) == \
        select_next(shifted * c * np.array([scores[int(i)] for i in leaves]))


@pytest.mark.parametrize("kind", [k.value for k in AlgorithmKind])
def test_every_kind_respects_budget_and_trace_invariants(kind):
    result = run(cfg(algorithm=kind, seed=1))
    assert len(result.dataset) == 30 and len(result.trace) == 30
    check_trace(result.trace, 30)
    assert [r.iteration for r in result.trace] == list(range(30))


def test_random_kind_is_uniform_and_seeded():
    a, b = run(cfg(algorithm="random", seed=4)), run(cfg(algorithm="random", seed=4))
    assert _rows(a) == _rows(b)
    assert np.all((a.dataset.X >= 0) & (a.dataset.X <= 1))


@pytest.mark.parametrize("kind", ["hibo", "turbo", "hibo-gp", "restricted-tree"])
def test_runs_are_deterministic(kind):
    assert _rows(run(cfg(algorithm=kind, seed=2))) == _rows(run(cfg(algorithm=kind, seed=2)))


def test_depth_one_hibo_equals_turbo():
    nav = {"initial_depth": 1, "restart_depth": 1, "adaptive": False}
    a = run(cfg(algorithm="hibo", seed=3, budget=40, navigator=nav))
    b = run(cfg(algorithm="turbo", seed=3, budget=40))
    assert _rows(a) == _rows(b)


def test_budget_fifty_init_ten():
    r = run(cfg(algorithm="turbo", budget=50, init_samples=10))
    assert len(r.trace) == 50


def test_step_grows_dataset_by_one():
    opt = Optimizer(cfg(algorithm="hibo", seed=0))
    opt._initial_batch()
    n = len(opt.dataset)
    restarts = opt.n_restarts
    opt.step()
    grown = len(opt.dataset) - n
    assert grown == 1 or opt.n_restarts > restarts


def test_counters_follow_the_improved_flag():
    """Replay the improved flags of a real run through both oracles."""
    nav = NavigatorConfig(coupled=False)
    opt = Optimizer(cfg(algorithm="hibo", seed=5, budget=60, navigator=nav.__dict__))
    opt._initial_batch()
    flags, lengths, depths = [], [], []
    while opt.remaining > 0:
        best = float(opt.local_y.max())
        restarts = opt.n_restarts
        obs = opt.step()
        if opt.n_restarts != restarts:
            break
        flags.append(obs.value > best)
        lengths.append(opt.tr.base_length)
        depths.append(opt.nav.max_depth)
    assert flags
    assert lengths == pytest.approx(trust_region_replay(flags)[0])
    assert depths == depth_replay(flags)[0]


def test_coupled_depth_follows_trust_region():
    nav = {"coupled": True}
    opt = Optimizer(cfg(algorithm="hibo", seed=6, budget=80, navigator=nav))
    opt._initial_batch()
    prev_len, prev_depth = opt.tr.base_length, opt.nav.max_depth
    while opt.remaining > 0:
        restarts = opt.n_restarts
        opt.step()
        if opt.n_restarts != restarts:
            break
        length, depth = opt.tr.base_length, opt.nav.max_depth
        if length < prev_len:
            assert depth == prev_depth + 1
        elif length > prev_len:
            assert depth == max(1, prev_depth - 1)
        else:
            assert depth == prev_depth
        prev_len, prev_depth = length, depth


def test_restricted_candidates_stay_in_chosen_leaf():
    from hibo.navigator import greedy_leaf

    opt = Optimizer(cfg(algorithm="restricted-tree", seed=1, budget=40, total_dim=4,
                        navigator={"initial_depth": 3, "adaptive": False}))
    opt._initial_batch()
    for _ in range(15):
        opt.step()
    ctx = opt.prepare()
    target = greedy_leaf(ctx.tree, ctx.cp)
    point = opt.propose(ctx)
    assert ctx.tree.assign_leaf(point) == target or ctx.tree.n_leaves == 1


def test_restart_resamples_and_counts():
    tr = {"min_length": 0.5}  # one halving triggers a restart
    r = run(cfg(algorithm="turbo", seed=0, budget=60, trust_region=tr))
    assert r.n_restarts >= 1
    assert len(r.trace) == 60


def test_failed_observations_continue():
    from hibo.core import Observation

    class Flaky:
        def __init__(self, space):
            self.space = space
            self.bench = None

        def __call__(self, iteration, point):
            if iteration % 4 == 3:
                return Observation(point, -100.0, True, 0.0, iteration)
            return Observation(point, -float(np.sum((point - 0.5) ** 2)), False, 0.0, iteration)

    from hibo.core import SearchSpace
    obj = Flaky(SearchSpace.from_bounds([0.0] * 3, [1.0] * 3))
    r = run(cfg(algorithm="hibo", total_dim=3, budget=25), objective=obj)
    assert sum(t.failed for t in r.trace) == sum(1 for i in range(25) if i % 4 == 3)
    assert all(t.regret is None for t in r.trace)
