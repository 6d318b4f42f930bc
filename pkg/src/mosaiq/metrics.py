"""Figures of merit: Gaussian Frechet distance and per-image variance scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, ShapeError
from .tensorlin import covariance, matrix_sqrt_psd, sym_eigen

FID_EPS = 1e-6
NEG_TOL = 1e-6


@dataclass(frozen=True)
class GaussianSummary:
    mean: np.ndarray
    cov: np.ndarray


def summarize(samples) -> GaussianSummary:
    mean, cov = covariance(samples)
    return GaussianSummary(mean, cov)


def fid_from_stats(m1, c1, m2, c2, eps: float = FID_EPS) -> float:
    """||m1 - m2||^2 + Tr(C1 + C2 - 2 (C1 C2)^{1/2}).

    The cross term is evaluated as Tr((C1^{1/2} C2 C1^{1/2})^{1/2}), which
    has the same eigenvalues but stays symmetric.  ``eps`` is added to both
    diagonals first; rank-deficient pixel covariances need it.
    """
    m1, m2 = np.atleast_1d(m1).astype(np.float64), np.atleast_1d(m2).astype(np.float64)
    c1, c2 = np.atleast_2d(c1).astype(np.float64), np.atleast_2d(c2).astype(np.float64)
    if m1.shape != m2.shape or c1.shape != c2.shape or c1.shape != (m1.size, m1.size):
        raise ShapeError("Gaussian summaries have mismatched dimensions")
    if eps:
        c1 = c1 + eps * np.eye(m1.size)
        c2 = c2 + eps * np.eye(m1.size)
    root1 = matrix_sqrt_psd(c1)
    inner = root1 @ c2 @ root1
    w = sym_eigen(0.5 * (inner + inner.T)).eigenvalues
    cross = np.sqrt(np.clip(w, 0.0, None)).sum()
    diff = m1 - m2
    value = float(diff @ diff + np.trace(c1) + np.trace(c2) - 2.0 * cross)
    if value < 0.0 and value >= -NEG_TOL:
        return 0.0
    return value


def fid(real, generated, eps: float = FID_EPS) -> float:
    """Frechet distance between Gaussians fitted to two sample sets (rows)."""
    a = np.atleast_2d(np.asarray(real, dtype=np.float64))
    b = np.atleast_2d(np.asarray(generated, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if len(a) < 2 or len(b) < 2:
        raise InsufficientSamplesError("FID needs at least 2 samples per set")
    s1, s2 = summarize(a), summarize(b)
    return fid_from_stats(s1.mean, s1.cov, s2.mean, s2.cov, eps=eps)


def variance_scores(images) -> np.ndarray:
    """Summed squared deviation of each image from the pixelwise mean image."""
    x = np.atleast_2d(np.asarray(images, dtype=np.float64))
    if len(x) < 2:
        raise InsufficientSamplesError("variance scores need at least 2 images")
    mu = x.mean(axis=0)
    return ((x - mu) ** 2).sum(axis=1)


def empirical_cdf(values) -> list[tuple[float, float]]:
    """Sorted (value, fraction of values <= value) pairs."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise InsufficientSamplesError("empirical CDF of an empty list")
    frac = np.searchsorted(v, v, side="right") / v.size
    return list(zip(v.tolist(), frac.tolist()))
