"""l1 conditioning of a weighted row set.

Given rows ``r_i`` with weights ``w_i`` we look for a positive diagonal ``D``
and an orthogonal ``V`` with

    |D V^T x|_2  <=  sum_i w_i |r_i . x|  <=  c sqrt(k) |D V^T x|_2

for all ``x``. The default construction uses l1 Lewis weights: at the fixed
point ``lam_i = sqrt(a_i^T M^{-1} a_i)`` with ``M = sum_i a_i a_i^T / lam_i``
(``a_i = w_i r_i``) Cauchy-Schwarz gives the sandwich with ``c = 1``. For an
inexact fixed point the slack is certified by the ratio
``tau = max_i sqrt(a_i^T M^{-1} a_i) / lam_i``; ``D`` is divided by ``tau`` so
the lower side holds exactly and ``c <= tau sqrt(sum(lam) / k)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

EIG_FLOOR = 1e-10
N_SWEEP_DIRECTIONS = 1000


@dataclass(frozen=True)
class L1Conditioner:
    d_diag: np.ndarray
    v_ortho: np.ndarray
    transform: np.ndarray  # (D V^T)^{-1} = V D^{-1}
    measured_distortion: float
    certified_distortion: float
    method_tag: str
    rank: int
    iterations: int = 0

    @property
    def k(self) -> int:
        return self.d_diag.shape[0]

    def ellipsoid_norm(self, x) -> np.ndarray:
        """``|D V^T x|_2`` for a vector or for each row of a matrix."""
        x = np.asarray(x, dtype=np.float64)
        return np.linalg.norm((x @ self.v_ortho) * self.d_diag, axis=-1)

    def u_norms(self, rows) -> np.ndarray:
        """Row-wise ``|r (D V^T)^{-1}|_1``."""
        rows = np.asarray(rows, dtype=np.float64)
        return np.abs(rows @ self.transform).sum(axis=-1)


def l1_functional(rows, weights, x) -> np.ndarray:
    """``sum_i w_i |r_i . x|`` for one direction or a stack of directions."""
    x = np.asarray(x, dtype=np.float64)
    return np.abs(np.asarray(x) @ (np.asarray(rows).T * np.asarray(weights))).sum(axis=-1)


def u_norm(cond: L1Conditioner, q) -> float:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != cond.k:
        raise InvalidInputError(f"expected a vector of length {cond.k}, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise InvalidInputError("q contains non-finite entries")
    return float(cond.u_norms(q))


def _lewis_weights(A: np.ndarray, max_iter: int, tol: float):
    n = A.shape[0]
    lam = np.ones(n)
    it = 0
    for it in range(1, max_iter + 1):
        M = A.T @ (A / lam[:, None])
        Minv = np.linalg.pinv(M, hermitian=True)
        new = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", A, Minv, A), 0.0))
        # rows outside the numerical range of M get a tiny leverage; keep them positive
        new = np.maximum(new, np.finfo(float).tiny)
        change = np.max(np.abs(new - lam) / lam)
        lam = new
        if change < tol:
            break
    return lam, it


def _floored_eigh(M: np.ndarray):
    evals, V = np.linalg.eigh(M)
    top = max(float(evals[-1]), 0.0)
    if top <= 0.0:
        raise InvalidInputError("row set has no mass: all weighted rows are zero")
    thresh = EIG_FLOOR * top
    rank = int(np.sum(evals > thresh))
    return np.maximum(evals, thresh), V, rank


def compute_l1_conditioner(
    rows,
    weights,
    method: str = "lewis",
    max_iter: int = 30,
    tol: float = 1e-6,
    seed: int = 0,
) -> L1Conditioner:
    """Build an l1 conditioner ``(D, V)`` for the weighted rows.

    ``method`` is ``"lewis"`` (l1 Lewis-weight fixed point) or ``"l2"`` (plain
    SVD of the weighted rows; honest but looser, slack up to ``sqrt(n / k)``).
    Eigenvalues below ``1e-10`` times the largest are floored so ``D`` is
    invertible; for rank-deficient inputs the sandwich is then only meaningful
    on the row space, which is where the distortion sweep is taken.
    """
    R = np.asarray(rows, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if R.ndim != 2 or R.shape[0] < 1 or R.shape[1] < 1:
        raise InvalidInputError(f"rows must be an n x k matrix with n, k >= 1, got {R.shape}")
    if w.shape != (R.shape[0],):
        raise InvalidInputError("weights length does not match rows")
    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(w))):
        raise InvalidInputError("rows/weights contain non-finite entries")
    if np.any(w < 0) or not np.any(w > 0):
        raise InvalidInputError("weights must be nonnegative with at least one positive entry")
    k = R.shape[1]

    A = R * w[:, None]
    A = A[np.any(A != 0.0, axis=1)]
    if A.shape[0] == 0:
        raise InvalidInputError("all weighted rows are zero")

    iterations = 0
    if method == "lewis":
        lam, iterations = _lewis_weights(A, max_iter, tol)
        M = A.T @ (A / lam[:, None])
        evals, V, rank = _floored_eigh(M)
        Minv = (V / evals) @ V.T
        lev = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", A, Minv, A), 0.0))
        tau = float(np.max(lev / lam))
        D = np.sqrt(evals) / tau
        certified = tau * np.sqrt(lam.sum() / k)
    elif method == "l2":
        evals, V, rank = _floored_eigh(A.T @ A)
        D = np.sqrt(evals)
        certified = np.sqrt(A.shape[0] / k)
    else:
        raise InvalidInputError(f"unknown conditioner method {method!r}")

    # orthonormal basis of the row space, for the distortion sweep
    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    basis = Vt[s > np.sqrt(EIG_FLOOR) * s[0]]

    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((N_SWEEP_DIRECTIONS, k))
    dirs = np.vstack([dirs, np.eye(k), basis])
    if basis.shape[0] < k:
        dirs = (dirs @ basis.T) @ basis
    norms = np.linalg.norm(dirs, axis=1)
    dirs = dirs[norms > 1e-12] / norms[norms > 1e-12, None]

    F = np.abs(dirs @ A.T).sum(axis=1)
    ell = np.linalg.norm((dirs @ V) * D, axis=1)
    lower = np.max(ell / F)
    if lower > 1.0:
        # rounding (or an inexact l2 basis) can leave a hair of violation
        D = D / lower
        ell = ell / lower
    measured = max(1.0, float(np.max(F / (np.sqrt(k) * ell))))

    return L1Conditioner(
        d_diag=D,
        v_ortho=V,
        transform=V / D,
        measured_distortion=measured,
        certified_distortion=max(1.0, float(certified)),
        method_tag=method,
        rank=rank,
        iterations=iterations,
    )
