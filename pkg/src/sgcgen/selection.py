"""Choosing the number of communities by scoring every candidate K."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .graph import Graph
from .lanczos import ConvergenceError, smallest_eigs
from .sbm import Partition, check_consistent, mle_block_probabilities
from .spectral import Mode, build_laplacian, cluster_basis, smallest_eigenpairs, theta

log = logging.getLogger(__name__)


class Mismatch(str, Enum):
    EIG = "eig"  # R1: spectral radius of the modular matrix
    MOD = "mod"  # R2: negative modularity
    AIC = "aic"  # R3
    BIC = "bic"  # R4


DEFAULT_ALPHA = {Mode.STANDARD: 1e-4, Mode.REGULARIZED: 1e-6}
METHOD_NAMES = {"sgc": Mode.STANDARD, "regsgc": Mode.REGULARIZED}


def detection_loss(theta_value: float, K: int) -> float:
    """Exponential detection loss exp(-theta / (K - 1))."""
    if K < 2:
        raise ValueError("K must be at least 2")
    return math.exp(-theta_value / (K - 1))


# --- R1 ------------------------------------------------------------------------

class ModularOperator:
    """Matrix-free B = A - blockwise(P_hat) with zero diagonal.

    ``B x = A x - (P_hat c)[g] + P_hat[g, g] x`` where ``c`` holds the
    per-community sums of ``x``; each product costs O(m + n + K^2).
    """

    def __init__(self, g: Graph, part: Partition):
        check_consistent(g, part)
        self.n = g.n
        self._A = g.adjacency
        self._labels = part.labels
        self._K = part.K
        self._P = mle_block_probabilities(g, part)
        self._diag = self._P[self._labels, self._labels]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        c = np.bincount(self._labels, weights=x, minlength=self._K)
        return self._A @ x - (self._P @ c)[self._labels] + self._diag * x

    def dense(self) -> np.ndarray:
        B = self._A.toarray() - self._P[np.ix_(self._labels, self._labels)]
        np.fill_diagonal(B, 0.0)
        return B


def mismatch_r1(g: Graph, part: Partition, tol: float = 1e-6, seed: int = 0,
                max_restarts: int = 5000) -> float:
    """Spectral radius of the modular matrix, from both ends of its spectrum."""
    B = ModularOperator(g, part)
    rng = np.random.default_rng([seed, 11])
    ncv = min(g.n, 30)
    lo = smallest_eigs(B.matvec, g.n, 1, tol=tol, ncv=ncv, rng=rng, max_restarts=max_restarts)
    hi = smallest_eigs(lambda x: -B.matvec(x), g.n, 1, tol=tol, ncv=ncv, rng=rng,
                       max_restarts=max_restarts)
    return float(max(abs(lo.eigenvalues[0]), abs(hi.eigenvalues[0])))


# --- R2 ------------------------------------------------------------------------

def modularity(g: Graph, part: Partition) -> float:
    """Q = sum_k (e_kk - b_k^2) from block edge counts."""
    check_consistent(g, part)
    if g.m == 0:
        raise ValueError("modularity undefined for a graph without edges")
    M = part.block_edges.astype(np.float64)
    e = M / (2.0 * g.m)
    e[np.diag_indices_from(e)] = np.diag(M) / g.m
    b = e.sum(axis=1)
    return float(np.trace(e) - (b * b).sum())


def mismatch_r2(g: Graph, part: Partition) -> float:
    return -modularity(g, part)


# --- R3 / R4 -------------------------------------------------------------------

def _xlogy(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x == 0, 0.0, x * np.log(np.where(x == 0, 1.0, y)))


def sbm_log_likelihood(g: Graph, part: Partition) -> float:
    """Bernoulli profile log-likelihood of ``g`` under SBM with MLE block probabilities."""
    P = mle_block_probabilities(g, part)
    M = part.block_edges.astype(np.float64)
    N = part.pair_counts
    iu = np.triu_indices(part.K)
    ll = _xlogy(M[iu], P[iu]) + _xlogy(N[iu] - M[iu], 1.0 - P[iu])
    return float(ll.sum())


def mismatch_r3(g: Graph, part: Partition) -> float:
    K = part.K
    return K * (K - 1) - 2.0 * sbm_log_likelihood(g, part)


def mismatch_r4(g: Graph, part: Partition) -> float:
    if g.m < 1:
        raise ValueError("BIC needs at least one edge")
    K = part.K
    return math.log(g.m) / 2.0 * K * (K - 1) - 2.0 * sbm_log_likelihood(g, part)


def mismatch(kind: Mismatch | str, g: Graph, part: Partition, seed: int = 0) -> float:
    kind = Mismatch(kind)
    if kind is Mismatch.EIG:
        return mismatch_r1(g, part, seed=seed)
    if kind is Mismatch.MOD:
        return mismatch_r2(g, part)
    if kind is Mismatch.AIC:
        return mismatch_r3(g, part)
    return mismatch_r4(g, part)


# --- K sweep -------------------------------------------------------------------

@dataclass
class SelectionConfig:
    method: Mode = Mode.STANDARD
    mismatch: Mismatch = Mismatch.MOD
    alpha: float | None = None  # None -> per-method default
    k_max: int = 50
    seed: int = 0
    kmeans_restarts: int = 10
    solver: str = "auto"

    def __post_init__(self):
        self.method = Mode(self.method)
        self.mismatch = Mismatch(self.mismatch)
        if self.alpha is None:
            self.alpha = DEFAULT_ALPHA[self.method]
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.k_max < 2:
            raise ValueError("k_max must be >= 2")

    def as_dict(self) -> dict:
        method = {v: k for k, v in METHOD_NAMES.items()}[self.method]
        return {"method": method, "mismatch": self.mismatch.value, "alpha": self.alpha,
                "k_max": self.k_max, "seed": self.seed}


@dataclass
class CandidateRecord:
    K: int
    theta: float | None = None
    loss: float | None = None
    mismatch: float | None = None
    objective: float | None = None
    partition: Partition | None = None
    error: str | None = None


@dataclass
class SelectionReport:
    config: SelectionConfig
    records: list[CandidateRecord]
    k_star: int
    partition: Partition
    eigenvalues: np.ndarray = field(default_factory=lambda: np.empty(0))

    def to_dict(self, extra: dict | None = None) -> dict:
        def num(x):
            return None if x is None else float(f"{x:.12g}")

        doc = {"config": self.config.as_dict()}
        doc.update(extra or {})
        doc["records"] = [
            {"K": r.K, "theta": num(r.theta), "f": num(r.loss), "R": num(r.mismatch),
             "objective": num(r.objective), **({"error": r.error} if r.error else {})}
            for r in self.records]
        doc["k_star"] = self.k_star
        doc["labels"] = self.partition.labels.tolist()
        return doc

    def to_json(self, extra: dict | None = None) -> str:
        return json.dumps(self.to_dict(extra), indent=2)


def select(g: Graph, cfg: SelectionConfig) -> SelectionReport:
    """Choose the number of communities by minimising f + alpha * R over K = 2..k_max.

    One eigendecomposition at k_max is shared by every K; candidate K uses
    the first K eigenvectors. Ties go to the smaller K.
    """
    if cfg.k_max > g.n:
        raise ValueError(f"k_max={cfg.k_max} exceeds n={g.n}")
    op = build_laplacian(g, cfg.method)
    basis = smallest_eigenpairs(op, cfg.k_max, seed=cfg.seed, solver=cfg.solver)
    records = []
    for K in range(2, cfg.k_max + 1):
        rec = CandidateRecord(K)
        try:
            sub = basis.truncate(K)
            rec.theta = theta(sub)
            rec.loss = detection_loss(rec.theta, K)
            rec.partition = cluster_basis(g, sub, K, seed=_kmeans_seed(cfg.seed, K),
                                          restarts=cfg.kmeans_restarts)
            rec.mismatch = mismatch(cfg.mismatch, g, rec.partition, seed=cfg.seed)
            rec.objective = rec.loss + cfg.alpha * rec.mismatch
        except (ConvergenceError, ValueError, ArithmeticError) as exc:
            log.warning("candidate K=%d failed: %s", K, exc)
            rec.error = str(exc)
            rec.objective = None
        records.append(rec)
    ok = [r for r in records if r.objective is not None and math.isfinite(r.objective)]
    if not ok:
        raise RuntimeError("every candidate K failed")
    best = min(ok, key=lambda r: (r.objective, r.K))
    return SelectionReport(cfg, records, best.K, best.partition, basis.eigenvalues)


def _kmeans_seed(seed: int, K: int) -> int:
    return int(np.random.SeedSequence([seed, K]).generate_state(1)[0])
