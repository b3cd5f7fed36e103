from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import trust_region_replay
from hibo.local_optimizer import (
    CandidateSource,
    TrustRegionConfig,
    default_n_candidates,
    gp_generate_candidates,
    tr_bounds,
    tr_generate_candidates,
    tr_init,
    tr_update,
)
from hibo.surrogate import GpHyperparams, GpModel


def _state(center=None, d=4):
    X = np.random.default_rng(0).random((8, d)) if center is None else np.atleast_2d(center)
    y = np.arange(X.shape[0], dtype=float)
    return tr_init(X, y, TrustRegionConfig())


def test_init_centres_on_best():
    X = np.array([[0.1, 0.1], [0.7, 0.3], [0.2, 0.9]])
    st_ = tr_init(X, np.array([1.0, 5.0, 2.0]))
    np.testing.assert_array_equal(st_.center, X[1])
    assert st_.base_length == 0.8


def test_update_examples():
    s = _state()
    for _ in range(3):
        s = tr_update(s, True)
    assert s.base_length == pytest.approx(1.6)
    for _ in range(3):
        s = tr_update(s, True)
    assert s.base_length == pytest.approx(1.6)  # capped
    s = _state()
    for _ in range(5):
        s = tr_update(s, False)
    assert s.base_length == pytest.approx(0.4)
    s = _state()
    for _ in range(25):
        s = tr_update(s, False)
    assert s.needs_restart and s.base_length < 0.03125


def test_alternating_never_resizes():
    s = _state()
    for i in range(200):
        s = tr_update(s, i % 2 == 0)
    assert s.base_length == 0.8 and not s.needs_restart


@settings(max_examples=300, deadline=None)
@given(st.lists(st.booleans(), max_size=200))
def test_matches_replay_oracle(seq):
    lengths, restarts = trust_region_replay(seq)
    s, got_len, got_restart = _state(), [], []
    for i, ok in enumerate(seq):
        s = tr_update(s, ok)
        if s.needs_restart:
            got_restart.append(i)
            s = _state()
        got_len.append(s.base_length)
    assert got_len == pytest.approx(lengths)
    assert got_restart == restarts


def test_bounds_shape_and_clipping():
    s = _state(center=[[0.5, 0.5, 0.0]])
    lb, ub = tr_bounds(s, np.array([1.0, 1.0, 1.0]))
    np.testing.assert_allclose(ub - lb, [0.8, 0.8, 0.4])
    ls = np.array([0.5, 1.0, 2.0])
    small = replace(_state(center=[[0.5, 0.5, 0.5]]), base_length=0.4)
    lb, ub = tr_bounds(small, ls)
    side = ub - lb
    assert np.prod(side) == pytest.approx(0.4**3)
    np.testing.assert_allclose(side / side[1], ls / ls[1])


def test_candidates_inside_region_and_deterministic():
    d = 30
    rng = np.random.default_rng(1)
    X, y = rng.random((12, d)), rng.normal(size=12)
    model = GpModel(X, y, GpHyperparams(rng.uniform(0.2, 2, d), 1.0, 1e-4))
    s = tr_init(X, y)
    a = tr_generate_candidates(s, model, 500, [0, 7])
    b = tr_generate_candidates(s, model, 500, [0, 7])
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.raw_acq, b.raw_acq)
    assert a.source is CandidateSource.TRUST_REGION and len(a) == 500
    lb, ub = tr_bounds(s, model.hyperparams.lengthscales)
    assert np.all((a.points >= lb - 1e-15) & (a.points <= ub + 1e-15))
    changed = a.points != s.center
    assert np.all(changed.any(axis=1))
    assert changed.mean() == pytest.approx(20 / d, abs=0.05)


def test_global_candidates_use_ei():
    rng = np.random.default_rng(2)
    X, y = rng.random((10, 3)), rng.normal(size=10)
    model = GpModel(X, y, GpHyperparams(np.full(3, 0.4), 1.0, 1e-4))
    batch = gp_generate_candidates(model, 200, float(y.max()), 3)
    assert batch.source is CandidateSource.GLOBAL
    np.testing.assert_allclose(batch.raw_acq, model.expected_improvement(batch.points, float(y.max())))


def test_default_candidates():
    assert default_n_candidates(2) == 200
    assert default_n_candidates(50) == 5000
    assert default_n_candidates(500) == 5000
