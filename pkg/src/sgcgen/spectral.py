"""Normalized graph Laplacians and spectral clustering on their smallest eigenpairs."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .graph import Graph, GraphError
from .kmeans import kmeans
from .lanczos import smallest_eigs
from .sbm import Partition

log = logging.getLogger(__name__)

DENSE_LIMIT = 512


class Mode(str, Enum):
    STANDARD = "standard"
    REGULARIZED = "regularized"


class Laplacian:
    """Matrix-free ``x -> x - S A S x`` with ``S = diag((d + tau)^(-1/2))``.

    ``tau`` is 0 in standard mode and the average degree 2m/n in
    regularized mode.
    """

    def __init__(self, g: Graph, mode: Mode | str = Mode.STANDARD):
        mode = Mode(mode)
        d = g.degrees.astype(np.float64)
        if mode is Mode.STANDARD:
            if (d == 0).any():
                raise GraphError("standard Laplacian needs every degree >= 1; "
                                 "extract the largest connected component first")
            tau = 0.0
        else:
            if g.n < 2:
                raise GraphError("regularized Laplacian needs n >= 2")
            tau = 2.0 * g.m / g.n
        self.graph = g
        self.mode = mode
        self.tau = tau
        self.scaling = 1.0 / np.sqrt(d + tau)
        self._A = g.adjacency

    @property
    def n(self) -> int:
        return self.graph.n

    def matvec(self, x: np.ndarray) -> np.ndarray:
        s = self.scaling
        if x.ndim == 2:
            return x - s[:, None] * (self._A @ (s[:, None] * x))
        return x - s * (self._A @ (s * x))

    __matmul__ = matvec

    def dense(self) -> np.ndarray:
        s = self.scaling
        M = -(s[:, None] * self._A.toarray() * s[None, :])
        M[np.diag_indices_from(M)] += 1.0
        return M


def build_laplacian(g: Graph, mode: Mode | str = Mode.STANDARD) -> Laplacian:
    return Laplacian(g, mode)


@dataclass
class SpectralBasis:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # n x K, orthonormal columns
    residuals: np.ndarray
    mode: Mode = Mode.STANDARD
    solver: str = "lanczos"
    diagnostics: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.eigenvalues)

    @property
    def theta(self) -> float:
        return theta(self)

    def truncate(self, K: int) -> "SpectralBasis":
        return SpectralBasis(self.eigenvalues[:K], self.vectors[:, :K], self.residuals[:K],
                             self.mode, self.solver, dict(self.diagnostics))

    def to_json(self, include_vectors: bool | None = None) -> str:
        n = self.vectors.shape[0]
        if include_vectors is None:
            include_vectors = n <= 10_000
        doc = {"mode": self.mode.value, "solver": self.solver, "K": self.K,
               "eigenvalues": [float(f"{x:.12g}") for x in self.eigenvalues],
               "residuals": [float(f"{x:.3g}") for x in self.residuals],
               "theta": float(f"{self.theta:.12g}")}
        if include_vectors:
            doc["vectors"] = [[float(f"{x:.12g}") for x in row] for row in self.vectors]
        return json.dumps(doc)


def _fix_signs(Y: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry of each column positive
    idx = np.argmax(np.abs(Y), axis=0)
    signs = np.sign(Y[idx, np.arange(Y.shape[1])])
    signs[signs == 0] = 1.0
    return Y * signs


def smallest_eigenpairs(op: Laplacian, K: int, tol: float = 1e-8, seed: int = 0,
                        solver: str = "auto", max_iter: int = 5000) -> SpectralBasis:
    """The K algebraically smallest eigenpairs of ``op``.

    ``solver`` is ``"lanczos"`` (matvec only), ``"dense"`` (full symmetric
    eigendecomposition, n <= 512) or ``"auto"`` which picks dense for small n.
    Two extra guard pairs are computed by Lanczos and discarded.
    """
    n = op.n
    if not 1 <= K <= n:
        raise ValueError(f"need 1 <= K <= n, got K={K}, n={n}")
    if solver == "auto":
        solver = "dense" if n <= DENSE_LIMIT else "lanczos"
    if solver == "dense":
        if n > DENSE_LIMIT:
            raise ValueError(f"dense solver limited to n <= {DENSE_LIMIT}")
        lam, Y = np.linalg.eigh(op.dense())
        lam, Y = lam[:K], Y[:, :K]
        res = np.linalg.norm(op.matvec(Y) - Y * lam, axis=0)
        extra = {}
    elif solver == "lanczos":
        nev = min(K + 2, n)
        r = smallest_eigs(op.matvec, n, nev, nconv=K, tol=tol, max_restarts=max_iter,
                          rng=np.random.default_rng([seed, 7]))
        lam, Y, res = r.eigenvalues[:K], r.eigenvectors[:, :K], r.residuals[:K]
        extra = {"restarts": r.restarts, "matvecs": r.matvecs}
    else:
        raise ValueError(f"unknown solver {solver!r}")
    diag = {"theta_extension": op.mode is Mode.REGULARIZED, **extra}
    return SpectralBasis(lam, _fix_signs(Y), res, op.mode, solver, diag)


def theta(basis: SpectralBasis) -> float:
    """Detectability statistic: sum over k = 2..K of (1 - lambda_k)."""
    return float(np.sum(1.0 - basis.eigenvalues[1:]))


def row_normalize(Y: np.ndarray, eps: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Scale rows to unit norm. Returns the result and a mask of zero rows left as-is."""
    norms = np.linalg.norm(Y, axis=1)
    zero = norms < eps
    out = np.zeros_like(Y, dtype=np.float64)
    out[~zero] = Y[~zero] / norms[~zero, None]
    return out, zero


def cluster_basis(g: Graph, basis: SpectralBasis, K: int, seed: int = 0,
                  restarts: int = 10) -> Partition:
    """Row-normalize the first K columns of ``basis`` and group the rows with k-means."""
    Yhat, zero = row_normalize(basis.vectors[:, :K])
    if zero.any():
        log.warning("%d rows of the spectral embedding are zero; they cluster at the origin", zero.sum())
    km = kmeans(Yhat, K, restarts=restarts, seed=seed)
    return Partition(g, km.labels, K)


def sgc_detect(g: Graph, K: int, mode: Mode | str = Mode.STANDARD, seed: int = 0,
               solver: str = "auto", restarts: int = 10) -> tuple[Partition, SpectralBasis]:
    """Spectral graph clustering of ``g`` into K communities."""
    if not 2 <= K <= g.n:
        raise ValueError(f"need 2 <= K <= n, got K={K}, n={g.n}")
    op = build_laplacian(g, mode)
    basis = smallest_eigenpairs(op, K, seed=seed, solver=solver)
    return cluster_basis(g, basis, K, seed=seed, restarts=restarts), basis
