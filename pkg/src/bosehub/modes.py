"""Single-particle eigenmodes of the hopping term.

A mode matrix ``C`` defines mode creation operators through
``c_k^dag = sum_l C[k, l] a_l^dag``; row ``k - 1`` holds mode label ``k``
(labels run ``1..L`` as in the usual sine/Fourier conventions, sites are
0-based with phase factors evaluated at ``l = site + 1``).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DegeneracyError, DomainError

__all__ = [
    "fourier_modes",
    "ground_mode",
    "mode_energies",
    "reciprocal_modes",
]


@lru_cache(maxsize=64)
def _modes(L: int, boundary: str) -> np.ndarray:
    ell = np.arange(1, L + 1)
    if boundary == "open":
        k = ell[:, None]
        f = np.sqrt(2.0 / (L + 1)) * np.sin(np.pi * k * ell[None, :] / (L + 1))
    elif boundary == "periodic":
        f = np.zeros((L, L))
        f[L - 1] = 1.0 / np.sqrt(L)
        if L % 2 == 0:
            f[L // 2 - 1] = (-1.0) ** ell / np.sqrt(L)
        for k in range(1, (L + 1) // 2):
            phase = 2 * np.pi * k * ell / L
            f[k - 1] = np.sqrt(2.0 / L) * np.cos(phase)
            f[L - k - 1] = np.sqrt(2.0 / L) * np.sin(phase)
    else:
        raise DomainError(f"unknown boundary {boundary!r}")
    f.setflags(write=False)
    return f


def reciprocal_modes(L: int, boundary: str = "open") -> np.ndarray:
    """Real orthogonal ``L x L`` matrix of hopping eigenmodes.

    Open chains use the sine transform
    ``f[k-1, l-1] = sqrt(2/(L+1)) sin(pi l k / (L+1))``, mode ``k`` having
    hopping energy ``2 J cos(pi k / (L+1))``.

    Periodic chains use real combinations of plane waves
    ``exp(2 pi i l k / L)``: row ``L-1`` is the uniform mode (``k = L``),
    for even ``L`` row ``L/2 - 1`` is the staggered mode (``k = L/2``), and
    each degenerate pair ``(k, L-k)`` with ``1 <= k < L/2`` is stored as
    ``sqrt(2/L) cos`` in row ``k-1`` and ``sqrt(2/L) sin`` in row ``L-k-1``.
    """
    if L < 1:
        raise DomainError("need L >= 1")
    return _modes(L, boundary)


def fourier_modes(L: int) -> np.ndarray:
    """Complex plane-wave modes ``C[k-1, l-1] = exp(2 pi i l k / L) / sqrt(L)``."""
    ell = np.arange(1, L + 1)
    return np.exp(2j * np.pi * np.outer(ell, ell) / L) / np.sqrt(L)


def mode_energies(L: int, boundary: str = "open", J: float = 1.0) -> np.ndarray:
    """Single-particle hopping energies of modes ``k = 1..L``."""
    k = np.arange(1, L + 1)
    if boundary == "open":
        return 2 * J * np.cos(np.pi * k / (L + 1))
    return 2 * J * np.cos(2 * np.pi * k / L)


def ground_mode(L: int, boundary: str = "open") -> int:
    """Label of the lowest hopping mode for ``J > 0`` (``L`` open, ``L/2`` periodic)."""
    if boundary == "open":
        return L
    if L % 2:
        raise DegeneracyError("periodic chain with odd L has a degenerate lowest mode")
    return L // 2
