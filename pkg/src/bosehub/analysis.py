"""Observables of many-body state vectors.

Localization indicators (inverse participation ratios in position and mode
space), one-body density matrices, single-site occupation distributions,
reciprocal-mode Fock states, overlaps, and the critical-hopping estimator.

For periodic chains the mode basis is real (see
:func:`bosehub.modes.reciprocal_modes`). Mode occupations reported for a
degenerate pair ``(k, L-k)`` are each half the pair total, which equals the
plane-wave occupation ``<b_k^dag b_k>`` for any real state. Distributions
``p_{nk}`` on periodic chains refer to the real cos/sin modes and are
experimental for odd ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from .errors import CapacityError, DomainError
from .fock import SectorBasis, enumerate_basis
from .modes import reciprocal_modes

__all__ = [
    "FOCK_EXPANSION_MAX_DIMENSION",
    "ObservableSet",
    "critical_tau",
    "ipr",
    "ipr_from_occupations",
    "measure",
    "occupation_density",
    "occupation_density_reciprocal",
    "occupations",
    "one_body_density",
    "overlap",
    "reciprocal_fock_basis",
    "reciprocal_fock_vector",
    "reciprocal_occupations",
]

FOCK_EXPANSION_MAX_DIMENSION = 5000
_NORM_TOL = 1e-8


def _check_norm(psi):
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > _NORM_TOL:
        raise DomainError(f"state must be unit-norm, got norm {nrm:.12g}")


def _check_dim(psi, basis: SectorBasis):
    if psi.shape != (basis.dimension,):
        raise DomainError(f"state of shape {psi.shape} does not live in a basis of dimension {basis.dimension}")


@lru_cache(maxsize=16)
def _pair_maps(L: int, N: int):
    """For every ordered site pair ``(l, m)``, ``l != m``: the basis indices
    ``i`` with ``n_m > 0``, the index ``j`` of ``a_l^dag a_m |i>``, and the
    matrix element."""
    basis = enumerate_basis(L, N)
    states = basis.states
    maps = {}
    for l in range(L):
        for m in range(L):
            if l == m:
                continue
            src = np.flatnonzero(states[:, m] > 0)
            new = states[src].copy()
            amp = np.sqrt(new[:, m] * (new[:, l] + 1.0))
            new[:, m] -= 1
            new[:, l] += 1
            maps[l, m] = (src, basis.rank_many(new), amp)
    return maps


def occupations(psi, basis: SectorBasis) -> np.ndarray:
    """Site occupations ``<n_l>``."""
    psi = np.asarray(psi)
    return (np.abs(psi) ** 2) @ basis.states


def one_body_density(psi, basis: SectorBasis) -> np.ndarray:
    """One-body density matrix ``rho[l, m] = <a_l^dag a_m>``.

    Real symmetric for real states, with trace ``N``.
    """
    psi = np.asarray(psi)
    _check_dim(psi, basis)
    _check_norm(psi)
    L = basis.L
    dtype = np.result_type(psi.dtype, float)
    rho = np.zeros((L, L), dtype=dtype)
    rho[np.diag_indices(L)] = occupations(psi, basis)
    for (l, m), (src, dst, amp) in _pair_maps(L, basis.N).items():
        rho[l, m] = np.sum(np.conj(psi[dst]) * amp * psi[src])
    return rho


def ipr_from_occupations(occ, N: int) -> float:
    """``(N^2 / sum(occ^2) - 1) / (L - 1)``: 0 for one occupied site, 1 for uniform."""
    occ = np.asarray(occ, dtype=float)
    L = occ.size
    if L < 2:
        raise DomainError("inverse participation ratio needs L >= 2")
    return float((N**2 / np.sum(occ**2) - 1.0) / (L - 1))


def _pair_average(occ, L: int, boundary: str):
    if boundary != "periodic":
        return occ
    occ = occ.copy()
    for k in range(1, (L + 1) // 2):
        a, b = k - 1, L - k - 1
        occ[a] = occ[b] = 0.5 * (occ[a] + occ[b])
    return occ


def reciprocal_occupations(psi, basis: SectorBasis, boundary: str = "open",
                           method: str = "one_body") -> np.ndarray:
    """Mode occupations ``<c_k^dag c_k>`` for ``k = 1..L`` (index ``k-1``).

    ``method="one_body"`` uses ``diag(f rho f^T)``; ``method="fock"``
    expands the state in the reciprocal Fock basis and marginalises. Both
    give identical results; the second is an independent check.
    """
    L = basis.L
    if method == "one_body":
        f = reciprocal_modes(L, boundary)
        rho = one_body_density(psi, basis)
        occ = np.real(np.einsum("kl,lm,km->k", f, rho, f))
    elif method == "fock":
        _check_norm(psi)
        coeffs = reciprocal_fock_basis(basis, boundary).T @ psi
        occ = (np.abs(coeffs) ** 2) @ basis.states
    else:
        raise DomainError(f"unknown method {method!r}")
    return _pair_average(occ, L, boundary)


def ipr(psi, basis: SectorBasis, space: str = "spatial", boundary: str = "open",
        method: str = "one_body") -> float:
    """Inverse participation ratio in position (``"spatial"``) or mode
    (``"reciprocal"``) space, built from squared expectation values
    ``<n_m>^2``."""
    if basis.L < 2:
        raise DomainError("inverse participation ratio needs L >= 2")
    psi = np.asarray(psi)
    _check_dim(psi, basis)
    if space == "spatial":
        _check_norm(psi)
        occ = occupations(psi, basis)
    elif space == "reciprocal":
        occ = reciprocal_occupations(psi, basis, boundary, method)
    else:
        raise DomainError(f"space must be 'spatial' or 'reciprocal', got {space!r}")
    return ipr_from_occupations(occ, basis.N)


def _marginal(weights, states, col, N):
    p = np.zeros(N + 1)
    np.add.at(p, states[:, col], weights)
    return p


def occupation_density(psi, basis: SectorBasis, site: int) -> np.ndarray:
    """Distribution ``p[n]`` of finding ``n`` bosons on `site` (diagonal of
    the single-site reduced density matrix)."""
    if not 0 <= site < basis.L:
        raise DomainError(f"site {site} outside chain of length {basis.L}")
    psi = np.asarray(psi)
    _check_dim(psi, basis)
    return _marginal(np.abs(psi) ** 2, basis.states, site, basis.N)


@lru_cache(maxsize=32)
def _creation_maps(L: int, n: int):
    """Index maps for ``a_l^dag``: sector ``n`` -> sector ``n + 1``."""
    lo, hi = enumerate_basis(L, n), enumerate_basis(L, n + 1)
    maps = []
    for l in range(L):
        new = lo.states.copy()
        amp = np.sqrt(new[:, l] + 1.0)
        new[:, l] += 1
        maps.append((hi.rank_many(new), amp))
    return maps, hi.dimension


def _apply_mode_creation(vec, L, n, row):
    """Apply ``sum_l row[l] a_l^dag`` to a vector in the ``n``-boson sector."""
    maps, dim = _creation_maps(L, n)
    out = np.zeros(dim, dtype=np.result_type(vec.dtype, row.dtype))
    for l, (dst, amp) in enumerate(maps):
        if row[l] != 0:
            np.add.at(out, dst, row[l] * amp * vec)
    return out


def mode_fock_vector(L: int, eta, modes: np.ndarray) -> np.ndarray:
    """``prod_k (c_k^dag)^eta_k / sqrt(eta_k!) |vac>`` in the position basis,
    for an arbitrary (possibly complex) mode-creation matrix."""
    eta = [int(e) for e in eta]
    vec = np.ones(1, dtype=modes.dtype)
    n = 0
    for k, count in enumerate(eta):
        for _ in range(count):
            vec = _apply_mode_creation(vec, L, n, modes[k])
            n += 1
        vec = vec / sqrt(factorial(count))
    return vec


def reciprocal_fock_vector(basis: SectorBasis, mode_occupations, boundary: str = "open") -> np.ndarray:
    """Position-basis vector of the mode Fock state ``|eta_1, ..., eta_L>``."""
    eta = np.asarray(mode_occupations, dtype=np.int64)
    if eta.shape != (basis.L,) or (eta < 0).any():
        raise DomainError(f"mode occupations must be {basis.L} non-negative integers")
    if eta.sum() != basis.N:
        raise DomainError(f"mode occupations sum to {eta.sum()}, expected N={basis.N}")
    return mode_fock_vector(basis.L, eta, reciprocal_modes(basis.L, boundary))


@lru_cache(maxsize=8)
def _fock_basis(L: int, N: int, boundary: str) -> np.ndarray:
    basis = enumerate_basis(L, N)
    f = reciprocal_modes(L, boundary)
    out = np.empty((basis.dimension, basis.dimension))
    for j, eta in enumerate(basis.states):
        out[:, j] = mode_fock_vector(L, eta, f)
    out.setflags(write=False)
    return out


def reciprocal_fock_basis(basis: SectorBasis, boundary: str = "open") -> np.ndarray:
    """Matrix whose column ``j`` is the mode Fock state labelled by
    ``basis.states[j]`` (read as mode occupations). Orthogonal."""
    if basis.dimension > FOCK_EXPANSION_MAX_DIMENSION:
        raise CapacityError(
            f"reciprocal Fock expansion capped at dimension {FOCK_EXPANSION_MAX_DIMENSION}")
    return _fock_basis(basis.L, basis.N, boundary)


def occupation_density_reciprocal(psi, basis: SectorBasis, mode: int, boundary: str = "open") -> np.ndarray:
    """Distribution ``p[n]`` of ``n`` bosons in mode label `mode` (1-based)."""
    if not 1 <= mode <= basis.L:
        raise DomainError(f"mode {mode} outside 1..{basis.L}")
    psi = np.asarray(psi)
    _check_dim(psi, basis)
    coeffs = reciprocal_fock_basis(basis, boundary).T @ psi
    return _marginal(np.abs(coeffs) ** 2, basis.states, mode - 1, basis.N)


def overlap(psi, phi) -> float:
    """Fidelity ``|<psi|phi>|^2``."""
    psi, phi = np.asarray(psi), np.asarray(phi)
    if psi.shape != phi.shape:
        raise DomainError(f"states live in different spaces: {psi.shape} vs {phi.shape}")
    _check_norm(psi)
    _check_norm(phi)
    return float(min(1.0, abs(np.vdot(psi, phi)) ** 2))


def critical_tau(tau_grid, values) -> float:
    """Grid point of steepest change, ``argmax |dP/dtau|``.

    Slopes use second-order central differences on the (possibly
    non-uniform) grid and one-sided differences at the ends. Ties, up to a
    relative 1e-9, go to the smaller ``tau``.
    """
    tau = np.asarray(tau_grid, dtype=float)
    P = np.asarray(values, dtype=float)
    if tau.ndim != 1 or tau.size < 5:
        raise DomainError("critical_tau needs at least 5 grid points")
    if P.shape != tau.shape:
        raise DomainError("tau grid and values differ in length")
    if not np.all(np.diff(tau) > 0):
        raise DomainError("tau grid must be strictly ascending")
    slope = np.abs(np.gradient(P, tau))
    top = slope.max()
    return float(tau[np.flatnonzero(slope >= top * (1 - 1e-9))[0]])


@dataclass
class ObservableSet:
    """Observables of one ground state (or their averages over an ensemble)."""

    energy_scaled: float
    ipr_s: float
    ipr_r: float
    occupations_s: np.ndarray = field(repr=False)
    occupations_r: np.ndarray = field(repr=False)
    fidelities: dict = field(default_factory=dict)


def measure(psi, basis: SectorBasis, energy: float, U: float = 1.0, boundary: str = "open") -> ObservableSet:
    """Collect the standard observables of a state with energy ``E / hbar``."""
    N = basis.N
    occ_s = occupations(psi, basis)
    occ_r = reciprocal_occupations(psi, basis, boundary)
    return ObservableSet(
        energy_scaled=energy / (U * N * (N - 1)) if N > 1 else float("nan"),
        ipr_s=ipr_from_occupations(occ_s, N),
        ipr_r=ipr_from_occupations(occ_r, N),
        occupations_s=occ_s,
        occupations_r=occ_r,
    )
