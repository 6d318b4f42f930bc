"""PCA feature pipeline: fit, min-max scale to [0, 1], and invert back to pixels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import ImageSet
from .errors import InsufficientSamplesError, ShapeError
from .tensorlin import sym_eigen

DEGENERATE_FEATURE = 0.5


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (k, d), unit rows, descending variance
    explained_variance: np.ndarray  # (k,)
    feat_min: np.ndarray  # (k,)
    feat_range: np.ndarray  # (k,)

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def degenerate(self) -> np.ndarray:
        """Mask of features whose training projections have zero range."""
        return self.feat_range == 0.0


def _pixels(images) -> np.ndarray:
    if isinstance(images, ImageSet):
        images = images.images
    return np.atleast_2d(np.asarray(images, dtype=np.float64))


def _fix_signs(components: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; argmax picks the lowest index on ties
    idx = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(len(components)), idx])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def fit(images, k: int) -> PcaModel:
    """Fit a k-component PCA on an ImageSet (or an (N, d) array).

    The per-feature scaling bounds are the min and max of the training
    projections, so every training image transforms into [0, 1]^k.
    """
    x = _pixels(images)
    n, d = x.shape
    if n == 0:
        raise InsufficientSamplesError("cannot fit PCA on an empty image set")
    if not 1 <= k <= d:
        raise ShapeError(f"k must be in 1..{d}, got {k}")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / max(n - 1, 1)
    dec = sym_eigen(0.5 * (cov + cov.T))
    components = _fix_signs(dec.eigenvectors[:, :k].T)
    variance = np.clip(dec.eigenvalues[:k], 0.0, None)
    proj = xc @ components.T
    lo = proj.min(axis=0)
    span = proj.max(axis=0) - lo
    span[span < 0] = 0.0
    return PcaModel(mean, components, variance, lo, span)


def project(model: PcaModel, images) -> np.ndarray:
    """Raw (unscaled) principal-component coordinates."""
    x = _pixels(images)
    if x.shape[1] != model.mean.size:
        raise ShapeError(f"expected {model.mean.size} pixels, got {x.shape[1]}")
    return (x - model.mean) @ model.components.T


def transform(model: PcaModel, images) -> np.ndarray:
    """Scaled features in [0, 1]; accepts one image or a batch."""
    single = np.ndim(images) == 1
    proj = project(model, images)
    deg = model.degenerate
    span = np.where(deg, 1.0, model.feat_range)
    feats = np.clip((proj - model.feat_min) / span, 0.0, 1.0)
    feats[:, deg] = DEGENERATE_FEATURE
    return feats[0] if single else feats


def inverse(model: PcaModel, features, clamp: bool = True) -> np.ndarray:
    """Map scaled features back to pixels, clamped to [0, 1] unless ``clamp`` is off."""
    single = np.ndim(features) == 1
    f = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if f.shape[1] != model.k:
        raise ShapeError(f"expected {model.k} features, got {f.shape[1]}")
    coords = model.feat_min + f * model.feat_range
    images = model.mean + coords @ model.components
    if clamp:
        images = np.clip(images, 0.0, 1.0)
    return images[0] if single else images
