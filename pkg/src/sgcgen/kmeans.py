"""Lloyd's k-means with k-means++ seeding and best-of-restarts selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int
    history: list[float] = field(default_factory=list)  # objective per Lloyd step of the winning run


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = ((X - centers[0]) ** 2).sum(1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            # all points coincide with chosen centers
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[i] = X[idx]
        closest = np.minimum(closest, ((X - centers[i]) ** 2).sum(1))
    return centers


def _repair_empty(X, labels, d2, k):
    """Move the point farthest from its centroid into each empty cluster."""
    counts = np.bincount(labels, minlength=k)
    own = d2[np.arange(len(X)), labels]
    for c in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        if not movable.any():
            break
        i = int(np.argmax(np.where(movable, own, -1.0)))
        counts[labels[i]] -= 1
        labels[i] = c
        counts[c] = 1
        own[i] = 0.0
    return labels


def _lloyd(X, centers, max_iter, tol):
    k = len(centers)
    history = []
    labels = None
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(X, centers)
        labels = np.argmin(d2, axis=1)
        labels = _repair_empty(X, labels, d2, k)
        counts = np.bincount(labels, minlength=k)
        centers = np.column_stack([np.bincount(labels, weights=X[:, j], minlength=k)
                                   for j in range(X.shape[1])]) / counts[:, None]
        obj = float(((X - centers[labels]) ** 2).sum())
        history.append(obj)
        if len(history) > 1 and history[-2] - obj < tol:
            break
    return labels, centers, history, it


def kmeans(X, k: int, restarts: int = 10, seed: int = 0, max_iter: int = 100,
           tol: float = 1e-9) -> KMeansResult:
    """Cluster the rows of ``X`` into ``k`` non-empty groups.

    Runs ``restarts`` independent k-means++ initialisations and keeps the run
    with the smallest within-cluster sum of squares.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if k < 1 or n < k:
        raise ValueError(f"k-means needs 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        labels, centers, history, it = _lloyd(X, kmeans_plus_plus(X, k, rng), max_iter, tol)
        if best is None or history[-1] < best.inertia:
            best = KMeansResult(labels, centers, history[-1], it, history)
    return best
