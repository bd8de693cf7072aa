"""Stochastic block model sampling and block-probability estimates."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .graph import Graph


class ValidationError(ValueError):
    pass


class PartitionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SbmParams:
    sizes: tuple[int, ...]
    P: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        P = np.array(self.P, dtype=np.float64)
        K = len(sizes)
        if K < 2:
            raise ValidationError("SBM needs at least 2 communities")
        if any(s < 1 for s in sizes):
            raise ValidationError("community sizes must be positive")
        if P.shape != (K, K):
            raise ValidationError(f"P must be {K}x{K}, got {P.shape}")
        if not np.all(np.isfinite(P)) or P.min() < 0 or P.max() > 1:
            raise ValidationError("edge probabilities must lie in [0, 1]")
        if not np.array_equal(P, P.T):
            raise ValidationError("P must be symmetric")
        P.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "P", P)

    @property
    def K(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def to_json(self) -> str:
        return json.dumps({"K": self.K, "sizes": list(self.sizes),
                           "P": [float(x) for x in self.P.ravel()]})

    @classmethod
    def from_json(cls, text: str) -> "SbmParams":
        doc = json.loads(text)
        sizes = doc["sizes"]
        K = int(doc.get("K", len(sizes)))
        if K != len(sizes):
            raise ValidationError("K does not match the sizes array")
        P = np.asarray(doc["P"], dtype=np.float64)
        if P.ndim == 1:
            if P.size != K * K:
                raise ValidationError(f"P must hold {K * K} row-major entries")
            P = P.reshape(K, K)
        return cls(tuple(sizes), P)


class Partition:
    """Community labeling of a graph's nodes with cached block edge counts.

    ``block_edges[k, l]`` is the number of edges between communities k and l;
    the diagonal counts within-community edges once.
    """

    def __init__(self, g: Graph, labels, K: int | None = None):
        labels = np.asarray(labels, dtype=np.int64).copy()
        if labels.shape != (g.n,):
            raise PartitionError(f"expected {g.n} labels, got {labels.shape}")
        if labels.size and labels.min() < 0:
            raise PartitionError("labels must be non-negative")
        K = int(labels.max()) + 1 if K is None else int(K)
        sizes = np.bincount(labels, minlength=K)
        if len(sizes) != K:
            raise PartitionError(f"label {len(sizes) - 1} out of range for K={K}")
        if (sizes == 0).any():
            raise PartitionError(f"empty communities: {np.flatnonzero(sizes == 0).tolist()}")
        labels.setflags(write=False)
        sizes.setflags(write=False)
        self.graph = g
        self.labels = labels
        self.K = K
        self.sizes = sizes

    @classmethod
    def from_any_labels(cls, g: Graph, labels) -> "Partition":
        """Compact arbitrary label values to ``0..K-1`` (first-appearance order)."""
        _, first, inv = np.unique(np.asarray(labels), return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first)] = np.arange(len(first))
        return cls(g, rank[inv])

    @cached_property
    def block_edges(self) -> np.ndarray:
        e = self.graph.edges()
        gu, gv = self.labels[e[:, 0]], self.labels[e[:, 1]]
        M = np.zeros((self.K, self.K), dtype=np.int64)
        np.add.at(M, (gu, gv), 1)
        M = M + M.T - np.diag(np.diag(M))
        M.setflags(write=False)
        return M

    @cached_property
    def volumes(self) -> np.ndarray:
        return np.bincount(self.labels, weights=self.graph.degrees, minlength=self.K).astype(np.int64)

    @cached_property
    def pair_counts(self) -> np.ndarray:
        """Number of node pairs per block: n_k n_l off-diagonal, C(n_k, 2) on it."""
        s = self.sizes.astype(np.float64)
        N = np.outer(s, s)
        np.fill_diagonal(N, s * (s - 1) / 2)
        return N

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def __repr__(self) -> str:
        return f"Partition(K={self.K}, sizes={self.sizes.tolist()})"


def planted_labels(sizes: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(sizes)), sizes)


def block_rng(seed: int, k: int, l: int) -> np.random.Generator:
    """Independent PCG64 stream for block (k, l) derived from ``(seed, k, l)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k, l])))


def _bernoulli_positions(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    """Indices in ``[0, total)`` of successes among iid Bernoulli(p) trials.

    Uses geometric gaps between successes so the cost is O(#successes).
    """
    if p <= 0 or total == 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1:
        return np.arange(total, dtype=np.int64)
    out = []
    pos = -1
    mean = total * p
    batch = int(mean + 5 * np.sqrt(mean) + 16)
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= total:
            out.append(idx[idx < total])
            break
        out.append(idx)
        pos = int(idx[-1])
        batch = max(16, batch // 4)
    return np.concatenate(out)


def _triangle_decode(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map t = j(j-1)/2 + i (0 <= i < j) back to (i, j)."""
    j = np.floor((1 + np.sqrt(1 + 8 * t.astype(np.float64))) / 2).astype(np.int64)
    # float rounding can be off by one for large t
    j -= (j * (j - 1) // 2 > t)
    j += ((j + 1) * j // 2 <= t)
    i = t - j * (j - 1) // 2
    return i, j


def generate_sbm(params: SbmParams, seed: int) -> tuple[Graph, Partition]:
    """Sample a graph from SBM(K, P) with nodes ordered community by community.

    Block (k, l) is drawn from its own sub-stream (see ``block_rng``), so the
    output depends only on ``params`` and ``seed``.
    """
    if params.n < 2:
        raise ValidationError("SBM needs at least 2 nodes")
    if seed < 0:
        raise ValidationError("seed must be non-negative")
    sizes = params.sizes
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    parts = []
    for k in range(params.K):
        for l in range(k, params.K):
            rng = block_rng(seed, k, l)
            p = float(params.P[k, l])
            if k == l:
                nk = sizes[k]
                t = _bernoulli_positions(rng, nk * (nk - 1) // 2, p)
                i, j = _triangle_decode(t)
                parts.append(np.column_stack([i + offsets[k], j + offsets[k]]))
            else:
                t = _bernoulli_positions(rng, sizes[k] * sizes[l], p)
                parts.append(np.column_stack([t // sizes[l] + offsets[k], t % sizes[l] + offsets[l]]))
    g = Graph.from_edges(params.n, np.concatenate(parts))
    return g, Partition(g, planted_labels(sizes), params.K)


def check_consistent(g: Graph, part: Partition) -> None:
    if part.graph is g:
        return
    if part.graph.n != g.n or not np.array_equal(part.graph.edges(), g.edges()):
        raise PartitionError("partition was built for a different graph")


def mle_block_probabilities(g: Graph, part: Partition) -> np.ndarray:
    """Maximum-likelihood block edge probabilities m_kl / (#pairs in block).

    Singleton communities have no within pairs; their diagonal entry is 0.
    """
    check_consistent(g, part)
    N = part.pair_counts
    M = part.block_edges.astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        P = np.where(N > 0, M / np.where(N > 0, N, 1), 0.0)
    return P
