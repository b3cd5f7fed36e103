"""Time the numba and pure-numpy kernel paths against each other.

    python bench/bench_kernels.py [--repeats 20] [--sizes 100x20,200x50,500x50]

Reports per-call milliseconds for the Matérn pass, the gradient-weight pass,
2-means Lloyd iterations and one full marginal-likelihood evaluation (value
and gradient), and checks that both paths agree numerically.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hibo import _kernels
from hibo.surrogate import GpConfig, log_marginal_likelihood


def _best_of(fn, repeats: int) -> float:
    fn()  # warm-up (and JIT compile on first use)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return 1e3 * min(times)


def _workloads(n: int, d: int, rng):
    X = rng.random((n, d))
    y = np.sin(3 * X).sum(axis=1)
    y = (y - y.mean()) / y.std()
    theta = GpConfig().default_hyperparams(d).to_theta()
    d2 = _kernels.sqdist(X / 0.5, X / 0.5)
    W = rng.standard_normal((n, n))
    W = W + W.T
    F = np.hstack([X, rng.random((n, 1))])
    centers = F[:2].copy()
    return {
        "matern": lambda: _kernels.matern52_from_sqdist(d2),
        "grad_weights": lambda: _kernels.matern52_grad_weights(d2, W),
        "lloyd": lambda: _kernels.lloyd(F, centers, 100),
        "lml+grad": lambda: log_marginal_likelihood(theta, X, y),
    }


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--sizes", default="100x20,200x50,500x50")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if _kernels.numba is None:
        print("numba is not importable; only the numpy path is available")
        return

    previous = _kernels.NUMBA_ENABLED
    print(f"{'n x d':>9} {'kernel':>13} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max |diff|':>11}")
    try:
        for size in args.sizes.split(","):
            n, d = (int(t) for t in size.split("x"))
            results = {}
            for backend in (False, True):
                _kernels.set_backend(backend)
                work = _workloads(n, d, np.random.default_rng(args.seed))
                results[backend] = {k: (_best_of(f, args.repeats), f()) for k, f in work.items()}
            for name in results[False]:
                t_np, out_np = results[False][name]
                t_nb, out_nb = results[True][name]
                a = out_np[0] if isinstance(out_np, tuple) else out_np
                b = out_nb[0] if isinstance(out_nb, tuple) else out_nb
                diff = float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))
                print(f"{size:>9} {name:>13} {t_np:10.3f} {t_nb:10.3f} {t_np / t_nb:8.2f} {diff:11.2e}")
    finally:
        _kernels.set_backend(previous)


if __name__ == "__main__":
    main()
