"""Extremal eigenpairs of real symmetric sparse operators.

:func:`ground_state` is a thick-restart Lanczos solver with full
reorthogonalisation; :func:`dense_spectrum` is a LAPACK-backed oracle for
small matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import CapacityError, ConvergenceError

__all__ = [
    "DENSE_MAX_DIMENSION",
    "EigenResult",
    "dense_ground_state",
    "dense_spectrum",
    "fix_phase",
    "ground_state",
    "most_excited_state",
]

DENSE_MAX_DIMENSION = 4000


@dataclass(frozen=True)
class EigenResult:
    """An eigenpair with its convergence record.

    Attributes
    ----------
    energy : float
        Eigenvalue in units of ``hbar * rad/s``.
    vector : ndarray
        Unit-norm eigenvector, sign fixed so the largest-magnitude entry is positive.
    residual : float
        ``||H v - E v||`` recomputed with a fresh mat-vec.
    iterations : int
        Number of restarts (0 for dense solves).
    history : tuple
        Lowest Ritz value after each restart.
    """

    energy: float
    vector: np.ndarray
    residual: float
    iterations: int
    history: tuple = ()


class _NonMonotonic(ConvergenceError):
    """A Ritz value rose across a restart; a retry would not help."""


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Flip the sign of `v` so its largest-magnitude component is positive."""
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def _residual(H, v, e) -> float:
    return float(np.linalg.norm(H @ v - e * v))


def ground_state(H, tol: float = 1e-10, max_iter: int = 200, seed: int = 0,
                 krylov_dim: int = 30, keep: int | None = None) -> EigenResult:
    """Lowest eigenpair of a real symmetric operator by thick-restart Lanczos.

    Parameters
    ----------
    H : sparse matrix, ndarray or LinearOperator
        Real symmetric operator supporting ``H @ v``.
    tol : float
        Absolute tolerance on ``||H v - E v||``.
    max_iter : int
        Maximum number of restarts.
    seed : int
        Seed for the start vector (and for any refill vector drawn after an
        invariant subspace is exhausted).
    krylov_dim : int
        Size of the search subspace before each restart.
    keep : int, optional
        Number of lowest Ritz vectors retained at a restart (default
        ``krylov_dim // 2``).

    Raises
    ------
    ConvergenceError
        If the residual is still above `tol` after `max_iter` restarts,
        both from the seeded start vector and from one retry with a
        perturbed seed (guarding against a start vector that happens to be
        orthogonal to the ground state).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    try:
        return _lanczos(H, tol, max_iter, np.random.default_rng(seed), krylov_dim, keep)
    except ConvergenceError as first:
        if isinstance(first, _NonMonotonic):
            raise
        return _lanczos(H, tol, max_iter, np.random.default_rng([seed, 1]), krylov_dim, keep)


def _lanczos(H, tol, max_iter, rng, krylov_dim, keep) -> EigenResult:
    n = H.shape[0]
    m = min(krylov_dim, n)
    k_keep = max(1, min(keep if keep is not None else m // 2, m - 1)) if m > 1 else 0

    V = np.zeros((n, m + 1))
    HV = np.zeros((n, m))
    v0 = rng.standard_normal(n)
    V[:, 0] = v0 / np.linalg.norm(v0)
    k = 0
    history = []
    best = np.inf
    energy = np.inf

    for restart in range(1, max_iter + 1):
        size = m
        for j in range(k, m):
            w = H @ V[:, j]
            HV[:, j] = w
            if j + 1 == n:
                size = n
                break
            for _ in range(2):
                w = w - V[:, : j + 1] @ (V[:, : j + 1].T @ w)
            beta = np.linalg.norm(w)
            if beta <= 1e-10 * max(1.0, np.linalg.norm(HV[:, j])):
                # invariant subspace found; refill with a fresh random direction
                w = rng.standard_normal(n)
                for _ in range(2):
                    w = w - V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                beta = np.linalg.norm(w)
            V[:, j + 1] = w / beta

        T = V[:, :size].T @ HV[:, :size]
        theta, S = np.linalg.eigh(0.5 * (T + T.T))
        y = V[:, :size] @ S[:, 0]
        Hy = HV[:, :size] @ S[:, 0]
        res = float(np.linalg.norm(Hy - theta[0] * y))
        if theta[0] > energy + 1e-12 * max(1.0, abs(energy)):
            raise _NonMonotonic(
                f"Ritz value increased across restart ({energy} -> {theta[0]})",
                best_residual=best, iterations=restart)
        energy = float(theta[0])
        history.append(energy)
        best = min(best, res)

        if res <= tol or size == n:
            y /= np.linalg.norm(y)
            fresh = _residual(H, y, energy)
            if fresh <= tol or size == n:
                e = float(y @ (H @ y))
                y = fix_phase(y)
                fresh = _residual(H, y, e)
                if fresh > tol:
                    raise ConvergenceError(
                        f"subspace solve left residual {fresh:.3e} > tol {tol:.3e}",
                        best_residual=fresh, iterations=restart)
                return EigenResult(e, y, fresh, restart, tuple(history))

        # thick restart: keep the lowest Ritz vectors plus the continuation vector
        k = k_keep
        nxt = V[:, size].copy()
        V[:, :k] = V[:, :size] @ S[:, :k]
        HV[:, :k] = HV[:, :size] @ S[:, :k]
        V[:, k] = nxt
        V[:, k + 1:] = 0.0

    raise ConvergenceError(
        f"Lanczos did not converge in {max_iter} restarts (best residual {best:.3e})",
        best_residual=best, iterations=max_iter)


def most_excited_state(H, **kwargs) -> EigenResult:
    """Highest eigenpair, computed as the ground state of ``-H``."""
    r = ground_state(-H, **kwargs)
    return EigenResult(-r.energy, r.vector, r.residual, r.iterations,
                       tuple(-h for h in r.history))


def _dense(H) -> np.ndarray:
    n = H.shape[0]
    if n > DENSE_MAX_DIMENSION:
        raise CapacityError(f"dense solve capped at dimension {DENSE_MAX_DIMENSION}, got {n}")
    return H.toarray() if sp.issparse(H) else np.asarray(H, dtype=float)


def dense_spectrum(H, vectors: bool = False):
    """Full symmetric eigendecomposition, eigenvalues ascending.

    Returns the eigenvalues, or ``(eigenvalues, eigenvectors)`` with
    eigenvectors as columns when `vectors` is true.
    """
    A = _dense(H)
    if vectors:
        return np.linalg.eigh(A)
    return np.linalg.eigvalsh(A)


def dense_ground_state(H) -> EigenResult:
    """Lowest eigenpair by LAPACK; the reference path for small matrices."""
    A = _dense(H)
    w, v = sla.eigh(A, subset_by_index=[0, 0])
    y = fix_phase(v[:, 0])
    return EigenResult(float(w[0]), y, _residual(A, y, w[0]), 0, (float(w[0]),))
