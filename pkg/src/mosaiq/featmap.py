"""Distribution of principal components across the sub-generator ensemble.

Generator i takes the i-th strongest component plus a block of n-1 weak
components from the tail: generator 0 gets the last n-1, generator 1 the
n-1 before those, and so on.  This evens out the explained variance each
sub-generator is responsible for.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True)
class FeatureAssignment:
    per_generator: tuple[tuple[int, ...], ...]

    @property
    def g(self) -> int:
        return len(self.per_generator)

    @property
    def n(self) -> int:
        return len(self.per_generator[0])

    @property
    def k(self) -> int:
        return self.g * self.n

    @property
    def index(self) -> np.ndarray:
        """(G, n) array; ``index[i, s]`` is the feature held in slot s of generator i."""
        return np.array(self.per_generator, dtype=np.int64).reshape(self.g, self.n)

    @property
    def forward_perm(self) -> np.ndarray:
        """Feature index -> flat slot position ``generator * n + slot``."""
        perm = np.empty(self.k, dtype=np.int64)
        perm[self.index.ravel()] = np.arange(self.k)
        return perm

    @property
    def inverse_perm(self) -> np.ndarray:
        """Flat slot position -> feature index."""
        return self.index.ravel()


def _check(k: int, g: int) -> int:
    if g < 1 or k < 1 or k % g:
        raise ShapeError(f"k={k} must be a positive multiple of g={g}")
    return k // g


def assign(k: int, g: int) -> FeatureAssignment:
    n = _check(k, g)
    lists = []
    for i in range(g):
        end = k - i * (n - 1)  # exclusive
        tail = range(end - (n - 1), end)
        lists.append(tuple(sorted([i, *tail])))
    return from_lists(lists, k)


def contiguous(k: int, g: int) -> FeatureAssignment:
    """Naive assignment: generator i holds features i*n .. i*n+n-1."""
    n = _check(k, g)
    return from_lists([tuple(range(i * n, (i + 1) * n)) for i in range(g)], k)


def from_lists(lists, k: int | None = None) -> FeatureAssignment:
    lists = tuple(tuple(int(j) for j in row) for row in lists)
    if not lists or len({len(row) for row in lists}) != 1 or not lists[0]:
        raise ShapeError("every generator must hold the same, nonzero number of features")
    flat = sorted(j for row in lists for j in row)
    k = len(flat) if k is None else k
    if flat != list(range(k)):
        raise ShapeError("generator lists do not partition 0..k-1")
    return FeatureAssignment(lists)


def gather(assignment: FeatureAssignment, features) -> np.ndarray:
    """Split features (k,) or (B, k) into per-generator slots (G, n) or (B, G, n)."""
    f = np.asarray(features)
    if f.shape[-1] != assignment.k:
        raise ShapeError(f"expected {assignment.k} features, got {f.shape[-1]}")
    return f[..., assignment.index]


def scatter(assignment: FeatureAssignment, parts) -> np.ndarray:
    """Inverse of ``gather``: (…, G, n) slots back to (…, k) feature order."""
    p = np.asarray(parts)
    if p.shape[-2:] != (assignment.g, assignment.n):
        raise ShapeError(f"expected trailing shape {(assignment.g, assignment.n)}, got {p.shape}")
    out = np.empty(p.shape[:-2] + (assignment.k,), dtype=p.dtype)
    out[..., assignment.index] = p
    return out


def variance_per_generator(assignment: FeatureAssignment, explained_variance) -> np.ndarray:
    ev = np.asarray(explained_variance, dtype=np.float64)
    return ev[assignment.index].sum(axis=1)


def spread(assignment: FeatureAssignment, explained_variance) -> float:
    """Max minus min of the per-generator explained-variance sums."""
    s = variance_per_generator(assignment, explained_variance)
    return float(s.max() - s.min())
