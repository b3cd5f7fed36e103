"""Synthetic test functions, dummy-dimension embedding and regret.

The formulas are the usual minimization forms on their literature boxes.
`EmbeddedBenchmark.evaluate` takes unit-cube points and returns the negated
value, so optimizers always maximize.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import SearchSpace


def levy(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[:, 0]) ** 2
    mid = np.sum((w[:, :-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:, :-1] + 1.0) ** 2), axis=1)
    tail = (w[:, -1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[:, -1]) ** 2)
    return head + mid + tail


def rastrigin(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    return 10.0 * x.shape[1] + np.sum(x**2 - 10.0 * np.cos(2.0 * np.pi * x), axis=1)


def ackley(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    d = x.shape[1]
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(x**2, axis=1) / d))
    b = -np.exp(np.sum(np.cos(2.0 * np.pi * x), axis=1) / d)
    return a + b + 20.0 + np.e


def branin(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    x1, x2 = x[:, 0], x[:, 1]
    b = 5.1 / (4.0 * np.pi**2)
    c = 5.0 / np.pi
    t = 1.0 / (8.0 * np.pi)
    return (x2 - b * x1**2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * np.cos(x1) + 10.0


_H6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H6_A = np.array([
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
])
_H6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])


def hartmann6(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    inner = np.sum(_H6_A[None, :, :] * (x[:, None, :] - _H6_P[None, :, :]) ** 2, axis=2)
    return -np.sum(_H6_ALPHA * np.exp(-inner), axis=1)


# refined from the literature location (0.20169, 0.150011, ...) by local minimization
_H6_XOPT = np.array([0.20168950909365746, 0.15001069354111374, 0.4768739729250998,
                     0.2753324275220782, 0.3116516172395686, 0.6573005345536702])


@dataclass(frozen=True)
class SyntheticFunction:
    """A minimization test function of fixed or free intrinsic dimension."""

    name: str
    intrinsic_dim: int
    lower: np.ndarray
    upper: np.ndarray
    optimum_value: float
    optimum_location: np.ndarray
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, raw) -> np.ndarray:
        return self.fn(raw)


def make_function(name: str, dim: int | None = None) -> SyntheticFunction:
    """Build a named function; ``dim`` is required for the dimension-free ones."""
    name = name.lower()
    if name in ("levy", "rastrigin", "ackley"):
        if dim is None or dim < 1:
            raise ValueError(f"{name} needs a positive dimension")
        box = {"levy": (-5.0, 10.0), "rastrigin": (-5.12, 5.12), "ackley": (-32.768, 32.768)}[name]
        xopt = np.ones(dim) if name == "levy" else np.zeros(dim)
        fn = {"levy": levy, "rastrigin": rastrigin, "ackley": ackley}[name]
        return SyntheticFunction(name, dim, np.full(dim, box[0]), np.full(dim, box[1]),
                                 0.0, xopt, fn)
    if name == "branin":
        if dim not in (None, 2):
            raise ValueError("branin is 2-dimensional")
        return SyntheticFunction("branin", 2, np.array([-5.0, 0.0]), np.array([10.0, 15.0]),
                                 5.0 / (4.0 * np.pi), np.array([np.pi, 2.275]), branin)
    if name == "hartmann6":
        if dim not in (None, 6):
            raise ValueError("hartmann6 is 6-dimensional")
        return SyntheticFunction("hartmann6", 6, np.zeros(6), np.ones(6),
                                 float(hartmann6(_H6_XOPT)[0]), _H6_XOPT.copy(), hartmann6)
    raise ValueError(f"unknown benchmark {name!r}")


@dataclass(frozen=True)
class EmbeddedBenchmark:
    """A synthetic function living in some slots of a larger unit cube.

    The remaining slots are dummy dimensions with no effect on the value.
    Dummy dimensions are given the bounds ``[0, 1]`` in `space`.
    """

    base: SyntheticFunction
    total_dim: int
    effective_indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.effective_indices, dtype=int)
        if idx.shape != (self.base.intrinsic_dim,):
            raise ValueError("one effective slot per intrinsic dimension required")
        if len(set(idx.tolist())) != idx.size or idx.min() < 0 or idx.max() >= self.total_dim:
            raise ValueError("effective indices must be distinct slots in range")
        object.__setattr__(self, "effective_indices", idx)

    @property
    def name(self) -> str:
        return self.base.name

    @property
    def space(self) -> SearchSpace:
        lo, hi = np.zeros(self.total_dim), np.ones(self.total_dim)
        lo[self.effective_indices] = self.base.lower
        hi[self.effective_indices] = self.base.upper
        return SearchSpace.from_bounds(lo, hi)

    @property
    def optimum_value(self) -> float:
        """Best achievable value in the maximization convention."""
        return -self.base.optimum_value

    def optimum_point(self) -> np.ndarray:
        """Normalized effective-slot coordinates of the optimum (dummies at 0.5)."""
        p = np.full(self.total_dim, 0.5)
        b = self.base
        p[self.effective_indices] = (b.optimum_location - b.lower) / (b.upper - b.lower)
        return p

    def evaluate(self, points) -> np.ndarray | float:
        """Negated function value at unit-cube point(s)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.total_dim:
            raise ValueError(f"expected {self.total_dim} coordinates")
        b = self.base
        raw = b.lower + pts[:, self.effective_indices] * (b.upper - b.lower)
        vals = -b.fn(raw)
        return float(vals[0]) if single else vals

    def regret(self, value: float) -> float:
        return regret(self, value)


def make_benchmark(name: str, total_dim: int, effective_dim: int | None = None) -> EmbeddedBenchmark:
    """``make_benchmark("hartmann6", 50)`` is Hartmann6 in the first 6 of 50 slots."""
    base = make_function(name, effective_dim if effective_dim is not None else (
        None if name.lower() in ("branin", "hartmann6") else total_dim))
    if base.intrinsic_dim > total_dim:
        raise ValueError("effective dimension exceeds total dimension")
    return EmbeddedBenchmark(base, total_dim, np.arange(base.intrinsic_dim))


def perturb_effective_dims(bench: EmbeddedBenchmark, permute_seed: int) -> EmbeddedBenchmark:
    """Move the effective slots to a seeded random permutation of all slots."""
    perm = np.random.default_rng(permute_seed).permutation(bench.total_dim)
    return replace(bench, effective_indices=perm[bench.effective_indices])


def regret(bench: EmbeddedBenchmark, value: float) -> float:
    """Gap between the optimum and an achieved (maximization-convention) value."""
    return float(abs(bench.optimum_value - value))
