"""Gaussian-process regression with an ARD Matérn-5/2 kernel.

Hyperparameters are fit by maximizing the log marginal likelihood with
L-BFGS-B in log space, using the analytic gradient.  Targets are
standardized internally and every returned quantity is on the original
target scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.linalg.lapack import dpotri
from scipy.optimize import minimize
from scipy.stats import norm

from . import _kernels

JITTER_LADDER = (0.0, 1e-8, 1e-6, 1e-4)


class InsufficientDataError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


def robust_cholesky(K: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``K``, adding diagonal jitter on failure.

    Returns ``(L, jitter)``.  Raises `NumericalError` once the ladder is
    exhausted.
    """
    eye = np.eye(K.shape[0])
    for jitter in JITTER_LADDER:
        try:
            return np.linalg.cholesky(K + jitter * eye if jitter else K), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(f"matrix not positive definite after jitter {JITTER_LADDER[-1]}")


@dataclass(frozen=True)
class GpHyperparams:
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def to_theta(self) -> np.ndarray:
        return np.log(np.concatenate([self.lengthscales,
                                      [self.signal_variance, self.noise_variance]]))

    @classmethod
    def from_theta(cls, theta) -> "GpHyperparams":
        e = np.exp(np.asarray(theta, dtype=float))
        return cls(e[:-2].copy(), float(e[-2]), float(e[-1]))


@dataclass(frozen=True)
class GpConfig:
    lengthscale_bounds: tuple[float, float] = (0.005, 4.0)
    signal_bounds: tuple[float, float] = (0.05, 20.0)
    noise_bounds: tuple[float, float] = (1e-8, 1e-3)
    n_restarts: int = 3
    max_iter: int = 50
    joint_cap: int = 2000

    def theta_bounds(self, dim: int) -> list[tuple[float, float]]:
        ls = tuple(np.log(self.lengthscale_bounds))
        return [ls] * dim + [tuple(np.log(self.signal_bounds)), tuple(np.log(self.noise_bounds))]

    def default_hyperparams(self, dim: int) -> GpHyperparams:
        lo, hi = self.lengthscale_bounds
        sig = float(np.clip(1.0, *self.signal_bounds))
        noise = float(np.clip(5e-4, *self.noise_bounds))
        return GpHyperparams(np.full(dim, float(np.clip(0.5, lo, hi))), sig, noise)


def log_marginal_likelihood(theta, X, y, return_grad: bool = True):
    """Log marginal likelihood of standardized targets ``y`` and its gradient.

    ``theta`` is ``log([lengthscales..., signal_variance, noise_variance])``.
    Non-positive-definite kernels give ``-inf`` (and a zero gradient).
    """
    theta = np.asarray(theta, dtype=float)
    n, d = X.shape
    ls = np.exp(theta[:d])
    s2 = np.exp(theta[d])
    sn2 = np.exp(theta[d + 1])
    Z = X / ls
    d2 = _kernels.sqdist(Z, Z)
    K = s2 * _kernels.matern52_from_sqdist(d2)
    K[np.diag_indices(n)] += sn2
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        return (-np.inf, np.zeros_like(theta)) if return_grad else -np.inf
    alpha = cho_solve((L, True), y)
    lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2.0 * np.pi)
    if not return_grad:
        return lml
    Kinv, info = dpotri(L, lower=1)
    if info != 0:
        return -np.inf, np.zeros_like(theta)
    Kinv = np.tril(Kinv) + np.tril(Kinv, -1).T
    W = np.outer(alpha, alpha) - Kinv
    grad = np.empty_like(theta)
    M = _kernels.matern52_grad_weights(d2, W)
    grad[:d] = 0.5 * s2 * _kernels.ls_grad_contract(Z, M)
    tr_w = np.trace(W)
    grad[d] = 0.5 * np.sum(W * K) - 0.5 * sn2 * tr_w
    grad[d + 1] = 0.5 * sn2 * tr_w
    return lml, grad


class GpModel:
    """A GP conditioned on fixed training data and hyperparameters."""

    def __init__(self, X, y, hyperparams: GpHyperparams, joint_cap: int = 2000):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y lengths differ")
        if X.shape[0] < 1:
            raise InsufficientDataError("need at least one training point")
        self.train_inputs = X
        self.hyperparams = hyperparams
        self.joint_cap = joint_cap
        self.target_mean = float(np.mean(y))
        std = float(np.std(y))
        self.target_std = std if std > 1e-12 else 1.0
        self.train_targets = (y - self.target_mean) / self.target_std

        hp = hyperparams
        self._Z = X / hp.lengthscales
        K = hp.signal_variance * _kernels.matern52(self._Z, self._Z)
        K[np.diag_indices_from(K)] += hp.noise_variance
        self._L, self.jitter = robust_cholesky(K)
        self._alpha = cho_solve((self._L, True), self.train_targets)

    @property
    def dim(self) -> int:
        return self.train_inputs.shape[1]

    @property
    def prior_variance(self) -> float:
        return self.hyperparams.signal_variance * self.target_std**2

    def _cross(self, points):
        Q = np.atleast_2d(np.asarray(points, dtype=float)) / self.hyperparams.lengthscales
        return Q, self.hyperparams.signal_variance * _kernels.matern52(Q, self._Z)

    def _posterior_std_scale(self, points):
        """Mean and variance on the standardized scale, plus the solve ``V``."""
        Q, Ks = self._cross(points)
        mean = Ks @ self._alpha
        V = solve_triangular(self._L, Ks.T, lower=True, check_finite=False)
        var = self.hyperparams.signal_variance - np.einsum("ij,ij->j", V, V)
        return Q, mean, np.maximum(var, 0.0), V

    def posterior(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Latent posterior mean and variance at ``points``."""
        _, mean, var, _ = self._posterior_std_scale(points)
        return mean * self.target_std + self.target_mean, var * self.target_std**2

    def thompson_sample(self, points, seed) -> np.ndarray:
        """One posterior draw at ``points``.

        Joint over the points when there are at most ``joint_cap`` of them,
        independent marginal draws otherwise.
        """
        Q, mean, var, V = self._posterior_std_scale(points)
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(mean.shape[0])
        if mean.shape[0] <= self.joint_cap:
            cov = self.hyperparams.signal_variance * _kernels.matern52(Q, Q) - V.T @ V
            L, _ = robust_cholesky(cov)
            draw = mean + L @ z
        else:
            draw = mean + np.sqrt(var) * z
        return draw * self.target_std + self.target_mean

    def expected_improvement(self, points, best: float) -> np.ndarray:
        mean, var = self.posterior(points)
        sd = np.sqrt(var)
        gap = mean - best
        ei = np.maximum(gap, 0.0)
        ok = sd > 1e-12
        z = gap[ok] / sd[ok]
        ei[ok] = gap[ok] * norm.cdf(z) + sd[ok] * norm.pdf(z)
        return np.maximum(ei, 0.0)


def fit_gp(X, y, config: GpConfig = GpConfig(), seed: int = 0,
           init: GpHyperparams | None = None) -> GpModel:
    """Fit hyperparameters by multi-start L-BFGS-B and return the model.

    The first start is ``init`` (or the config defaults); the remaining
    ``n_restarts - 1`` are drawn log-uniformly from inside the bounds.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] < 2:
        raise InsufficientDataError("need at least 2 observations to fit a GP")
    n, d = X.shape
    mu, std = float(np.mean(y)), float(np.std(y))
    ys = (y - mu) / (std if std > 1e-12 else 1.0)
    bounds = config.theta_bounds(d)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    rng = np.random.default_rng(seed)
    starts = [np.clip((init or config.default_hyperparams(d)).to_theta(), lo, hi)]
    # random starts avoid the extreme corners of the lengthscale box
    ls_lo = max(np.log(config.lengthscale_bounds[0]), np.log(0.05))
    ls_hi = min(np.log(config.lengthscale_bounds[1]), np.log(2.0))
    for _ in range(max(config.n_restarts, 1) - 1):
        t = np.empty(d + 2)
        t[:d] = rng.uniform(ls_lo, ls_hi, size=d)
        t[d] = rng.uniform(np.log(0.5), np.log(2.0))
        t[d + 1] = rng.uniform(lo[d + 1], hi[d + 1])
        starts.append(np.clip(t, lo, hi))

    def objective(theta):
        val, grad = log_marginal_likelihood(theta, X, ys)
        if not np.isfinite(val):
            return 1e25, np.zeros_like(theta)
        return -val, -grad

    best_theta, best_val = starts[0], np.inf
    for t0 in starts:
        res = minimize(objective, t0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": config.max_iter})
        if res.fun < best_val:
            best_val, best_theta = float(res.fun), np.clip(res.x, lo, hi)
    hp = GpHyperparams.from_theta(best_theta)
    return GpModel(X, y, hp, joint_cap=config.joint_cap)
