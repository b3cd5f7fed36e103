"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``HIBO_NUMBA`` is not set to
``0``; ``NUMBA_ENABLED`` reports which one is active.  Pairwise distances
always go through BLAS; numba fuses the elementwise passes that follow them
(which numpy would spread over several full-size temporaries) and runs the
Lloyd iterations of 2-means.  The ``*_numpy`` / ``*_numba`` variants stay
importable so both paths can be tested and benchmarked against each other.
"""

from __future__ import annotations

import os

import numpy as np

SQRT5 = float(np.sqrt(5.0))

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_ENABLED = numba is not None and os.environ.get("HIBO_NUMBA", "1") != "0"


def sqdist(A, B):
    """Squared Euclidean distances between the rows of ``A`` and ``B``."""
    aa = np.einsum("ij,ij->i", A, A)
    bb = np.einsum("ij,ij->i", B, B)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def ls_grad_contract(Z, M):
    """``sum_ij M_ij (Z_ik - Z_jk)^2`` for every column k, ``M`` symmetric."""
    rows = M.sum(axis=1)
    return 2.0 * (Z * Z).T @ rows - 2.0 * np.einsum("ik,ik->k", Z, M @ Z)


# --------------------------------------------------------------------------
# numpy path
# --------------------------------------------------------------------------


def matern52_from_sqdist_numpy(d2):
    sr = SQRT5 * np.sqrt(d2)
    return (1.0 + sr + sr * sr / 3.0) * np.exp(-sr)


def matern52_grad_weights_numpy(d2, W):
    """``W * (5/3)(1 + sqrt5 r) exp(-sqrt5 r)``: per-pair weights of the
    log-lengthscale gradient (the distance factor r cancels analytically)."""
    sr = SQRT5 * np.sqrt(d2)
    return W * (5.0 / 3.0) * (1.0 + sr) * np.exp(-sr)


def lloyd_numpy(X, centers, max_iter):
    """Lloyd iterations from ``centers``.

    Returns ``(labels, centers, inertia, ok)`` with ``ok`` False when a
    cluster went empty.
    """
    centers = np.array(centers, dtype=float)
    k = centers.shape[0]
    labels = np.full(X.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        counts = np.bincount(new_labels, minlength=k)
        if np.any(counts == 0):
            return new_labels, centers, np.inf, False
        for c in range(k):
            centers[c] = X[new_labels == c].mean(axis=0)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, centers, float(d2[np.arange(X.shape[0]), labels].sum()), True


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def _matern52_from_sqdist_nb(d2):
        n, m = d2.shape
        out = np.empty((n, m))
        for i in range(n):
            for j in range(m):
                sr = SQRT5 * np.sqrt(d2[i, j])
                out[i, j] = (1.0 + sr + sr * sr / 3.0) * np.exp(-sr)
        return out

    @numba.njit(cache=True)
    def _matern52_grad_weights_nb(d2, W):
        n, m = d2.shape
        out = np.empty((n, m))
        c = 5.0 / 3.0
        for i in range(n):
            for j in range(m):
                sr = SQRT5 * np.sqrt(d2[i, j])
                out[i, j] = W[i, j] * c * (1.0 + sr) * np.exp(-sr)
        return out

    @numba.njit(cache=True)
    def _assign_nb(X, centers, labels):
        n, d = X.shape
        k = centers.shape[0]
        inertia = 0.0
        for i in range(n):
            best = np.inf
            arg = 0
            for c in range(k):
                s = 0.0
                for q in range(d):
                    t = X[i, q] - centers[c, q]
                    s += t * t
                if s < best:
                    best = s
                    arg = c
            labels[i] = arg
            inertia += best
        return inertia

    @numba.njit(cache=True)
    def _lloyd_nb(X, centers, max_iter):
        n, d = X.shape
        k = centers.shape[0]
        centers = centers.copy()
        labels = np.full(n, -1, dtype=np.int64)
        new_labels = np.empty(n, dtype=np.int64)
        for _ in range(max_iter):
            _assign_nb(X, centers, new_labels)
            sums = np.zeros((k, d))
            counts = np.zeros(k, dtype=np.int64)
            for i in range(n):
                counts[new_labels[i]] += 1
                for q in range(d):
                    sums[new_labels[i], q] += X[i, q]
            for c in range(k):
                if counts[c] == 0:
                    return new_labels.copy(), centers, np.inf, False
                for q in range(d):
                    centers[c, q] = sums[c, q] / counts[c]
            same = True
            for i in range(n):
                if new_labels[i] != labels[i]:
                    same = False
                    break
            if same:
                break
            labels[:] = new_labels
        inertia = _assign_nb(X, centers, labels)
        return labels, centers, inertia, True

    def matern52_from_sqdist_numba(d2):
        return _matern52_from_sqdist_nb(np.ascontiguousarray(d2, dtype=np.float64))

    def matern52_grad_weights_numba(d2, W):
        return _matern52_grad_weights_nb(np.ascontiguousarray(d2, dtype=np.float64),
                                         np.ascontiguousarray(W, dtype=np.float64))

    def lloyd_numba(X, centers, max_iter):
        labels, centers, inertia, ok = _lloyd_nb(
            np.ascontiguousarray(X, dtype=np.float64),
            np.ascontiguousarray(centers, dtype=np.float64),
            int(max_iter))
        return labels, centers, float(inertia), bool(ok)

else:  # pragma: no cover
    matern52_from_sqdist_numba = matern52_from_sqdist_numpy
    matern52_grad_weights_numba = matern52_grad_weights_numpy
    lloyd_numba = lloyd_numpy


def set_backend(use_numba: bool) -> bool:
    """Rebind the active kernels; returns the previous setting.

    Asking for numba when it is not importable selects numpy.
    """
    global matern52_from_sqdist, matern52_grad_weights, lloyd, NUMBA_ENABLED
    previous = NUMBA_ENABLED
    NUMBA_ENABLED = bool(use_numba) and numba is not None
    if NUMBA_ENABLED:
        matern52_from_sqdist = matern52_from_sqdist_numba
        matern52_grad_weights = matern52_grad_weights_numba
        lloyd = lloyd_numba
    else:
        matern52_from_sqdist = matern52_from_sqdist_numpy
        matern52_grad_weights = matern52_grad_weights_numpy
        lloyd = lloyd_numpy
    return previous


set_backend(NUMBA_ENABLED)


def matern52(A, B):
    """Unit-variance Matérn-5/2 correlation between pre-scaled inputs."""
    return matern52_from_sqdist(sqdist(A, B))
