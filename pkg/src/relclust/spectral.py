"""Spectral relaxation of the constrained DP-means objective.

For a partition with normalised indicator matrix ``Y = Z (Z^T Z)^{-1/2}``,
``tr(Y^T M Y)`` with ``M = K - lam I + xi1 E+ - xi2 E-`` and ``K = X X^T``
(the gram matrix) equals ``tr(K)`` minus the squared-error DP-means
objective plus the size-weighted link term
``sum_k (1/n_k) sum_{i in k} (xi1 f_k^i - xi2 s_k^i)``. Maximising over all
orthonormal ``Y`` gives the sum of positive eigenvalues of ``M``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MAY, Partition, SideInfo


def side_matrices(E: SideInfo) -> tuple[np.ndarray, np.ndarray]:
    """Dense 0/1 indicator matrices of may links and may-not links."""
    n = E.n
    plus = np.zeros((n, n))
    minus = np.zeros((n, n))
    i, j, v = E.arrays
    may = v == MAY
    plus[i[may], j[may]] = plus[j[may], i[may]] = 1.0
    minus[i[~may], j[~may]] = minus[j[~may], i[~may]] = 1.0
    return plus, minus


def gram(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return X @ X.T


def build_spectral_matrix(kernel, E: SideInfo, xi1: float, xi2: float, lam: float,
                          is_data: bool = False) -> np.ndarray:
    """``K - lam I + xi1 E+ - xi2 E-``.

    ``kernel`` is an n x n symmetric matrix, or with ``is_data=True`` an
    n x d data matrix whose gram matrix is used.
    """
    K = gram(kernel) if is_data else np.asarray(kernel, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel must be square, got {K.shape}")
    if not np.all(np.isfinite(K)):
        raise ValueError("kernel has non-finite entries")
    if not np.allclose(K, K.T, atol=1e-10, rtol=0):
        raise ValueError("kernel is not symmetric")
    if E.n != n:
        raise ValueError(f"side info over {E.n} instances, kernel is {n} x {n}")
    plus, minus = side_matrices(E)
    M = K - lam * np.eye(n) + xi1 * plus - xi2 * minus
    return 0.5 * (M + M.T)


def jacobi_eigh(A, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a dense symmetric matrix.

    Returns eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns. Stops once the off-diagonal Frobenius mass
    drops below ``tol * ||A||_F``.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if n < 2 or scale == 0.0:
        w = np.diag(A).copy()
        order = np.argsort(-w, kind="stable")
        return w[order], V[:, order]
    target = tol * scale
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:  # theta**2 would overflow
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q]
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :]
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True, eq=False)
class SpectralResult:
    value: float          # sum over eigenvalues mu_i > lam of (mu_i - lam)
    k_hat: int            # number of eigenvalues of M + lam I above lam
    eigenvalues: np.ndarray
    vectors: np.ndarray   # eigenvectors for the k_hat leading eigenvalues


def spectral_relaxation(M, lam: float = 0.0) -> SpectralResult:
    """Relaxed optimum of ``max tr(Y^T M Y)`` over orthonormal ``Y``.

    ``M`` already carries the ``-lam I`` shift, so the eigenvalues of the
    unshifted matrix exceed ``lam`` exactly where those of ``M`` are
    positive.
    """
    M = np.asarray(M, dtype=float)
    if not np.allclose(M, M.T, atol=1e-10, rtol=0):
        raise ValueError("matrix is not symmetric")
    w, V = jacobi_eigh(M)
    pos = w > 0
    return SpectralResult(float(w[pos].sum()), int(pos.sum()), w + lam, V[:, pos])


def indicator(partition: Partition) -> np.ndarray:
    """Normalised assignment matrix ``Z (Z^T Z)^{-1/2}``."""
    Z = np.zeros((partition.n, partition.K))
    Z[np.arange(partition.n), partition.assignments] = 1.0
    return Z / np.sqrt(partition.counts)[None, :]


def discrete_value(M, partition: Partition) -> float:
    """``tr(Y^T M Y)`` for the partition's normalised indicator."""
    Y = indicator(partition)
    return float(np.trace(Y.T @ np.asarray(M, dtype=float) @ Y))
