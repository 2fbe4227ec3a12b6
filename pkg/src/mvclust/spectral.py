"""Spectral clustering on the learned graph, plus k-means utilities.

Normalized-cut variant: symmetrize the graph, form the symmetric normalized
Laplacian, embed each sample with the eigenvectors of the k smallest
eigenvalues (rows scaled to unit length), and run seeded k-means++ / Lloyd
on the embedding. The k-means routine doubles as the trivial per-view /
concatenated baselines.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGraphWarning
from .types import MultiViewDataset

Array = np.ndarray

DEGREE_FLOOR = 1e-12


@dataclass
class Partition:
    """Cluster assignment: labels in [0, k) for each of n samples."""

    labels: Array
    k: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.labels.shape[0]


def spectral_embed(S: Array, k: int) -> Array:
    """(n, k) embedding from the k smallest eigenvectors of L_sym.

    W = (S + S^T)/2; L_sym = I - D^{-1/2} W D^{-1/2} with D the degree
    diagonal. Rows of the eigenvector block are normalized to unit length;
    all-zero rows are left as zero. Isolated samples (zero degree) trigger a
    DegenerateGraphWarning and have their degree floored.
    """
    S = np.asarray(S, dtype=np.float64)
    n = S.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    W = (S + S.T) * 0.5
    deg = W.sum(axis=1)
    if deg.min() <= 0:
        warnings.warn(
            f"{int((deg <= 0).sum())} isolated sample(s); degrees floored",
            DegenerateGraphWarning,
            stacklevel=2,
        )
        deg = np.maximum(deg, DEGREE_FLOOR)
    d_isqrt = 1.0 / np.sqrt(deg)
    L = np.eye(n) - d_isqrt[:, None] * W * d_isqrt[None, :]
    L = (L + L.T) * 0.5
    _, U = np.linalg.eigh(L)
    E = U[:, :k]
    norms = np.linalg.norm(E, axis=1)
    nz = norms > 0
    E[nz] /= norms[nz, None]
    return E


def _kmeans_pp_centers(X: Array, k: int, rng: np.random.Generator) -> Array:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)  # duplicated points: any choice is equivalent
        centers[j] = X[idx]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(X: Array, centers: Array, rng: np.random.Generator, max_iter: int) -> tuple[Array, float]:
    n, k = X.shape[0], centers.shape[0]
    labels = np.full(n, -1)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for j in range(k):
            mask = new_labels == j
            if mask.any():
                centers[j] = X[mask].mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its center
                far = d2[np.arange(n), new_labels].argmax()
                centers[j] = X[far]
                new_labels[far] = j
                d2[far] = 0.0  # keep a second empty cluster from taking the same point
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    wcss = float(d2[np.arange(n), labels].sum())
    return labels, wcss


def kmeans(points: Array, k: int, restarts: int = 10, seed=0, max_iter: int = 300) -> Partition:
    """Seeded k-means++ / Lloyd; best of `restarts` runs by within-cluster
    sum of squares. Deterministic for a fixed seed."""
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    if n < k:
        raise ValueError(f"need n >= k, got n={n}, k={k}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best_labels, best_wcss = None, np.inf
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        centers = _kmeans_pp_centers(X, k, rng)
        labels, wcss = _lloyd(X, centers, rng, max_iter)
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    return Partition(labels=best_labels, k=k)


def cluster_graph(S: Array, k: int, restarts: int = 10, seed=0) -> Partition:
    """Spectral embedding of S followed by k-means."""
    return kmeans(spectral_embed(S, k), k, restarts=restarts, seed=seed)


def per_view_kmeans(ds: MultiViewDataset, k: int, restarts: int = 10, seed=0) -> list[Partition]:
    """k-means on each raw view separately (samples are view columns)."""
    return [
        kmeans(X.T, k, restarts=restarts, seed=[seed, v]) for v, X in enumerate(ds.views)
    ]


def concatenated_kmeans(ds: MultiViewDataset, k: int, restarts: int = 10, seed=0) -> Partition:
    """k-means on the feature-wise concatenation of all views."""
    return kmeans(np.vstack(ds.views).T, k, restarts=restarts, seed=seed)
