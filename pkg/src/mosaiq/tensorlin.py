"""Small dense linear algebra used by PCA and FID.

Matrices are plain 2-D float64 numpy arrays.  ``sym_eigen`` defaults to
LAPACK (``numpy.linalg.eigh``); a cyclic Jacobi solver is kept alongside it
for small problems and as an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InsufficientSamplesError, NotPSDError

SYM_RTOL = 1e-10
CLAMP_TOL = 1e-10
PSD_TOL = 1e-6


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_symmetric(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix is not square: {a.shape}")
    scale = max(np.abs(a).max(initial=0.0), 1.0)
    if np.abs(a - a.T).max(initial=0.0) > SYM_RTOL * scale:
        raise DimensionError("matrix is not symmetric")


def _sorted_desc(w: np.ndarray, v: np.ndarray) -> EigenDecomposition:
    # stable sort keeps the incoming order among ties
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order].copy(), v[:, order].copy())


def jacobi_eigen(a, tol: float = 1e-12, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Sweeps over all (p, q) pairs annihilating a[p, q] with a plane rotation
    until the off-diagonal Frobenius norm drops below ``tol`` (relative to
    the matrix norm) or ``max_sweeps`` is reached.  O(n^3) per sweep, so
    meant for small matrices.
    """
    a = _as_matrix(a)
    _check_symmetric(a)
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    norm = max(np.linalg.norm(a), np.finfo(float).tiny)

    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off < tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                diff = a[q, q] - a[p, p]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * (abs(a[p, p]) + abs(a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff  # theta^2 would overflow
                else:
                    theta = diff / (2.0 * apq)
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    return _sorted_desc(np.diag(a).copy(), v)


def sym_eigen(a, method: str = "lapack") -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    ``method`` is ``"lapack"`` (default) or ``"jacobi"``.
    """
    if method == "jacobi":
        return jacobi_eigen(a)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    a = _as_matrix(a)
    _check_symmetric(a)
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    # eigh is ascending; flip first so ties keep a consistent order
    return _sorted_desc(w[::-1], v[:, ::-1])


def matrix_sqrt_psd(a, method: str = "lapack") -> np.ndarray:
    """Symmetric PSD square root B with B @ B == a.

    Eigenvalues in [-1e-6, 0) are treated as floating-point drift and
    clamped to zero; anything more negative raises ``NotPSDError``.
    """
    dec = sym_eigen(a, method=method)
    w = dec.eigenvalues
    if w.size and w[-1] < -PSD_TOL:
        raise NotPSDError(f"matrix has eigenvalue {w[-1]:.3g} < 0")
    root = np.sqrt(np.clip(w, 0.0, None))
    v = dec.eigenvectors
    b = (v * root) @ v.T
    return 0.5 * (b + b.T)


def covariance(samples) -> tuple[np.ndarray, np.ndarray]:
    """Mean and unbiased (1/(N-1)) covariance of the rows of ``samples``."""
    x = _as_matrix(samples)
    n = x.shape[0]
    if n < 2:
        raise InsufficientSamplesError(f"covariance needs at least 2 samples, got {n}")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / (n - 1)
    return mean, 0.5 * (cov + cov.T)
