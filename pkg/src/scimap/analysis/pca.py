"""PCA via eigendecomposition of the feature covariance (dim x dim)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embedder import EmbeddingStore
from ..errors import DegenerateDataError, DimensionMismatchError, ValidationError


@dataclass
class PcaModel:
    mean: np.ndarray                       # (dim,)
    components: np.ndarray                 # (k, dim), orthonormal rows
    explained_variance_ratios: np.ndarray  # (k,), nonincreasing


def pca_fit(vectors: np.ndarray, k: int) -> PcaModel:
    """Fit the top-k principal components of an (n, dim) matrix.

    Ratios are eigenvalues over the total variance (all of it, not just the
    kept components); eigenvalue round-off below zero is clamped. Component
    signs are fixed so the largest-magnitude entry is positive.
    """
    data = np.asarray(vectors, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValidationError(f"need an (n >= 2, dim) matrix, got shape {data.shape}")
    n, dim = data.shape
    if not 1 <= k <= min(n - 1, dim):
        raise ValidationError(f"k={k} out of range [1, {min(n - 1, dim)}] for n={n}, dim={dim}")

    mean = data.mean(axis=0)
    centered = data - mean
    covariance = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.maximum(eigenvalues[order], 0.0)
    total = eigenvalues.sum()
    if total == 0.0:
        raise DegenerateDataError("all points identical: total variance is zero")

    components = eigenvectors[:, order[:k]].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance_ratios=eigenvalues[:k] / total,
    )


def explained_variance_curve(vectors: np.ndarray, up_to: int) -> np.ndarray:
    """Cumulative explained-variance ratios for components 1..up_to."""
    model = pca_fit(vectors, up_to)
    return np.cumsum(model.explained_variance_ratios)


def project_2d(model: PcaModel, store: EmbeddingStore) -> dict[str, tuple[float, float]]:
    """Coordinates of every stored vector on the first two components."""
    if model.components.shape[0] < 2:
        raise ValidationError("model must have at least 2 components for a 2D projection")
    if model.mean.shape[0] != store.dim:
        raise DimensionMismatchError(
            f"model dim {model.mean.shape[0]} does not match store dim {store.dim}"
        )
    coordinates = (store.matrix.astype(np.float64) - model.mean) @ model.components[:2].T
    return {record_id: (float(x), float(y)) for record_id, (x, y) in zip(store.ids, coordinates)}
