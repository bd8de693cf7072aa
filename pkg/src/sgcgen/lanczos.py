"""Thick-restart Lanczos for a few algebraically smallest eigenpairs.

Only products with the operator are used, so each restart cycle costs
``ncv`` matvecs plus O(n * ncv^2) for full reorthogonalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residuals: np.ndarray):
        super().__init__(f"{message}; achieved residuals {np.array2string(residuals, precision=3)}")
        self.residuals = residuals


@dataclass
class LanczosResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray  # explicit ||A x - lambda x||
    restarts: int
    matvecs: int


def _orthogonalize(V: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # classical Gram-Schmidt, applied twice
    h = V.T @ w
    w = w - V @ h
    h2 = V.T @ w
    w = w - V @ h2
    return w, h + h2


def smallest_eigs(matvec: Callable[[np.ndarray], np.ndarray], n: int, nev: int, *,
                  nconv: int | None = None, tol: float = 1e-8, max_restarts: int = 5000,
                  ncv: int | None = None, rng: np.random.Generator | None = None,
                  v0: np.ndarray | None = None) -> LanczosResult:
    """Compute the ``nev`` algebraically smallest eigenpairs of a symmetric operator.

    Args:
        matvec: x -> A x for a symmetric A of order ``n``.
        nev: number of Ritz pairs returned (ascending).
        nconv: how many of the leading pairs must reach ``tol``; the rest are
            guard pairs that only steady the restart. Defaults to ``nev``.
        tol: pair i converges when its residual is <= tol * max(1, |lambda_i|).
        max_restarts: restart cycles before ``ConvergenceError``.
        ncv: Krylov subspace size (capped at ``n``).

    Returns:
        LanczosResult with orthonormal eigenvectors as columns.
    """
    if not 1 <= nev <= n:
        raise ValueError(f"need 1 <= nev <= n, got nev={nev}, n={n}")
    nconv = nev if nconv is None else min(nconv, nev)
    rng = np.random.default_rng(0) if rng is None else rng
    if ncv is None:
        ncv = max(2 * nev + 20, 40)
    ncv = min(ncv, n)

    V = np.zeros((n, ncv + 1))
    T = np.zeros((ncv, ncv))
    b = np.zeros(ncv)  # coupling of the residual vector V[:, ncv] to the basis
    v = rng.standard_normal(n) if v0 is None else np.asarray(v0, dtype=np.float64).copy()
    V[:, 0] = v / np.linalg.norm(v)
    k = 0
    matvecs = 0
    beta = 0.0

    for restart in range(max_restarts + 1):
        # expand the basis from column k to ncv
        for j in range(k, ncv):
            w = matvec(V[:, j])
            matvecs += 1
            w, h = _orthogonalize(V[:, :j + 1], w)
            T[:j + 1, j] = h
            T[j, :j + 1] = h
            beta = float(np.linalg.norm(w))
            if j + 1 == n:
                beta = 0.0
                break
            if beta <= 1e-12 * max(1.0, float(np.abs(h).max(initial=0.0))):
                # invariant subspace: continue with a fresh direction
                w, _ = _orthogonalize(V[:, :j + 1], rng.standard_normal(n))
                w, _ = _orthogonalize(V[:, :j + 1], w)
                beta = 0.0
                V[:, j + 1] = w / np.linalg.norm(w)
            else:
                V[:, j + 1] = w / beta
        p = ncv
        # after the expansion the residual couples only to the last column
        b[:] = 0.0
        b[p - 1] = beta
        theta, S = np.linalg.eigh(0.5 * (T[:p, :p] + T[:p, :p].T))
        res_est = np.abs(b[:p] @ S)
        want = res_est[:nconv] <= tol * np.maximum(1.0, np.abs(theta[:nconv]))
        if want.all() or p == n:
            X = V[:, :p] @ S[:, :nev]
            X, _ = np.linalg.qr(X)
            # Rayleigh-Ritz on the converged block to clean up the QR
            AX = np.column_stack([matvec(X[:, i]) for i in range(nev)])
            matvecs += nev
            H = X.T @ AX
            lam, Q = np.linalg.eigh(0.5 * (H + H.T))
            X = X @ Q
            AX = AX @ Q
            res = np.linalg.norm(AX - X * lam, axis=0)
            return LanczosResult(lam, X, res, restart, matvecs)
        if restart == max_restarts:
            raise ConvergenceError(f"no convergence after {max_restarts} restarts", res_est[:nconv])

        # thick restart: keep the leading Ritz vectors plus the residual direction
        k = min(max(nev + (p - nev) // 2, nev + 1), p - 1)
        Vk = V[:, :p] @ S[:, :k]
        resid = V[:, p].copy()
        V[:] = 0.0
        V[:, :k] = Vk
        V[:, k] = resid
        T[:] = 0.0
        T[np.arange(k), np.arange(k)] = theta[:k]
        coupling = beta * S[p - 1, :k]
        T[k, :k] = coupling
        T[:k, k] = coupling
    raise AssertionError("unreachable")
