import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hibo.config import RunConfig
from hibo.objective_io import (
    ConfigurationError,
    ExternalObjectiveSpec,
    decode_reply,
    encode_request,
    evaluate_external,
    s_pitr,
)
from hibo.reporting import run_experiment

WORKERS = Path(__file__).parent / "workers"
PARAMS = (("a", 0.0, 1.0), ("b", -1.0, 1.0))


def spec(worker, *args, timeout=30.0, penalty=-7.0):
    return ExternalObjectiveSpec((sys.executable, str(WORKERS / worker), *args), PARAMS,
                                 timeout, penalty)


def test_round_trip_success(tmp_path):
    req = tmp_path / "req.txt"
    obs = evaluate_external(spec("echo_request.py", str(req)), 4, [0.5, 0.0])
    assert obs.value == 1.5 and not obs.failed
    assert obs.eval_seconds == pytest.approx(0.1) and obs.iteration == 4
    np.testing.assert_allclose(obs.point, [0.5, 0.5])
    raw = req.read_bytes()
    assert raw.endswith(b"\n") and raw.count(b"\n") == 1
    assert json.loads(raw) == {"iteration": 4, "params": {"a": 0.5, "b": 0.0}}


def test_nonzero_exit_is_penalized():
    obs = evaluate_external(spec("exit_nonzero.py"), 0, [0.1, 0.1])
    assert obs.failed and obs.value == -7.0 and obs.eval_seconds > 0


def test_malformed_reply_is_penalized():
    obs = evaluate_external(spec("malformed.py"), 0, [0.1, 0.1])
    assert obs.failed and obs.value == -7.0


def test_timeout_is_penalized_with_wall_time():
    t0 = time.perf_counter()
    obs = evaluate_external(spec("sleepy.py", timeout=1.0), 0, [0.1, 0.1])
    assert time.perf_counter() - t0 < 9
    assert obs.failed and obs.value == -7.0 and obs.eval_seconds >= 1.0


def test_reported_failure_uses_penalty():
    obs = evaluate_external(spec("reports_failure.py"), 0, [0.1, 0.1])
    assert obs.failed and obs.value == -7.0 and obs.eval_seconds == pytest.approx(4.5)


def test_spawn_failure_is_configuration_error(tmp_path):
    bad = ExternalObjectiveSpec((str(tmp_path / "missing-binary"),), PARAMS)
    with pytest.raises(ConfigurationError):
        evaluate_external(bad, 0, [0.1, 0.1])


def test_wire_format():
    line = encode_request(2, {"x": 1, "y": 2.5})
    assert line == b'{"iteration": 2, "params": {"x": 1.0, "y": 2.5}}\n'
    assert decode_reply('{"objective": 3, "failed": false, "eval_seconds": 1, "z": 0}') == (3.0, False, 1.0)
    for bad in ('[]', '{"objective": 1}', '{"objective": "1", "failed": false, "eval_seconds": 0}',
                '{"objective": 1, "failed": 0, "eval_seconds": 0}',
                '{"objective": 1, "failed": false, "eval_seconds": -1}'):
        with pytest.raises((ValueError, KeyError)):
            decode_reply(bad)


def test_spec_dict_round_trip():
    s = spec("quadratic.py")
    assert ExternalObjectiveSpec.from_dict(s.to_dict()) == s
    assert s.space.names == ["a", "b"]


def _external_config(out, seed=0, algorithm="hibo"):
    return RunConfig.from_dict({
        "algorithm": algorithm, "benchmark": None, "budget": 14, "init_samples": 6, "seed": seed,
        "n_candidates": 64, "output_dir": str(out),
        "external": spec("quadratic.py").to_dict(),
    })


def test_external_run_is_byte_reproducible(tmp_path):
    a = run_experiment(_external_config(tmp_path / "a"))
    b = run_experiment(_external_config(tmp_path / "b"))
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()
    assert a == b
    assert a["s_pitr"] is not None and a["evaluations"] == 14


def test_spitr_examples():
    assert s_pitr(100, 50, 2, 25) == 1.0
    assert s_pitr(30, 15, 0, 100) == 2.0
    assert s_pitr(0, 10, 3, 5) == 0.0
    with pytest.raises(ValueError):
        s_pitr(1, 0, 0, 10)
    with pytest.raises(ValueError):
        s_pitr(1, -1, 0, 10)


pos = st.floats(1e-3, 1e6)


@given(pos, pos, st.integers(0, 1000), pos, pos, st.integers(1, 100))
def test_spitr_monotonicity(pi, tt, nf, pe, dt, dn):
    base = s_pitr(pi, tt, nf, pe)
    assert s_pitr(pi, tt, nf + dn, pe) < base
    assert s_pitr(pi, tt + dt, nf, pe) < base
    assert s_pitr(pi + dt, tt, nf, pe) > base
