"""Search-space definition, observation storage and initial sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import qmc


class BoundsError(ValueError):
    """A raw coordinate lies outside its dimension's bounds."""


class SequencingError(ValueError):
    """An observation was appended out of order."""


@dataclass(frozen=True)
class Dimension:
    name: str
    lower: float
    upper: float


@dataclass(frozen=True)
class SearchSpace:
    """Ordered, named, continuous box.

    Optimizer internals only ever see points in the unit cube; `normalize`
    and `denormalize` convert at the boundary.
    """

    dims: tuple[Dimension, ...]

    def __post_init__(self):
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")
        for d in self.dims:
            if not d.lower < d.upper:
                raise ValueError(f"dimension {d.name!r}: lower must be < upper")

    @classmethod
    def from_bounds(cls, lower: Sequence[float], upper: Sequence[float],
                    names: Sequence[str] | None = None) -> "SearchSpace":
        if len(lower) != len(upper):
            raise ValueError("lower and upper must have equal length")
        if names is None:
            names = [f"x{i}" for i in range(len(lower))]
        return cls(tuple(Dimension(str(n), float(lo), float(hi))
                         for n, lo, hi in zip(names, lower, upper)))

    @property
    def dim(self) -> int:
        return len(self.dims)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lower for d in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.upper for d in self.dims])

    def normalize(self, raw) -> np.ndarray:
        """Map raw coordinates (shape ``(d,)`` or ``(n, d)``) into ``[0, 1]^d``."""
        raw = np.asarray(raw, dtype=float)
        if raw.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {raw.shape[-1]}")
        lo, hi = self.lower, self.upper
        bad = (raw < lo) | (raw > hi)
        if np.any(bad):
            idx = int(np.argwhere(bad)[0][-1])
            d = self.dims[idx]
            raise BoundsError(
                f"dimension {d.name!r} out of bounds [{d.lower}, {d.upper}]")
        return (raw - lo) / (hi - lo)

    def denormalize(self, point) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        lo, hi = self.lower, self.upper
        return lo + point * (hi - lo)


def initial_sample(dim: int, n: int, seed: int) -> np.ndarray:
    """Latin-hypercube sample of ``n`` points in ``[0, 1]^dim``.

    Each dimension has exactly one point in each of the ``n`` equal-width
    strata.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    sampler = qmc.LatinHypercube(d=dim, seed=np.random.default_rng(seed))
    return sampler.random(n)


@dataclass(frozen=True)
class Observation:
    point: np.ndarray
    value: float
    failed: bool = False
    eval_seconds: float = 0.0
    iteration: int = 0


@dataclass
class HistoryDataset:
    """Append-only list of observations.

    ``X`` and ``y`` are kept as growing arrays so repeated model fits do not
    rebuild them from the observation list.
    """

    dim: int
    observations: list[Observation] = field(default_factory=list)

    def __post_init__(self):
        obs, self.observations = self.observations, []
        self._X = np.empty((0, self.dim))
        self._y = np.empty(0)
        self.best_value = -np.inf
        for o in obs:
            self.append(o)

    def __len__(self) -> int:
        return len(self.observations)

    def append(self, obs: Observation) -> None:
        if obs.iteration != len(self.observations):
            raise SequencingError(
                f"expected iteration {len(self.observations)}, got {obs.iteration}")
        point = np.asarray(obs.point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"point must have shape ({self.dim},)")
        self.observations.append(obs)
        self._X = np.vstack([self._X, point[None, :]])
        self._y = np.append(self._y, float(obs.value))
        self.best_value = max(self.best_value, float(obs.value))

    @property
    def X(self) -> np.ndarray:
        return self._X

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def n_failed(self) -> int:
        return sum(o.failed for o in self.observations)
