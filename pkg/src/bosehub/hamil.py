"""Disordered attractive Bose-Hubbard Hamiltonian in a fixed-N sector.

The operator assembled here is

    H / hbar = sum_l [ w_l n_l - (U/2) n_l (n_l - 1) ]
               + J sum_<l,m> (a_m^dag a_l + a_l^dag a_m)

with ``U > 0`` attractive. The hopping enters with ``+J``; no re-signing is
done. The mean on-site frequency is dropped since it only shifts a fixed-N
spectrum. Matrices are real symmetric ``scipy.sparse`` CSR matrices with
both triangles stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .fock import SectorBasis

__all__ = [
    "BOUNDARIES",
    "ModelParams",
    "ScaledParams",
    "bonds",
    "build_hamiltonian",
    "disorder_rng",
    "number_operator",
    "sample_disorder",
    "scale",
    "write_matrix_market",
]

BOUNDARIES = ("open", "periodic")


def _check_boundary(boundary: str) -> str:
    if boundary not in BOUNDARIES:
        raise DomainError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    return boundary


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of one Hamiltonian instance.

    Frequencies (``U``, ``J``, ``omega``) are angular frequencies; energies
    are reported as ``E / hbar`` in the same units.

    Only the structural invariants (positive ``L`` and ``N``, matching
    ``omega`` length, known boundary) are enforced on construction. The
    physical regime ``U > 0, J >= 0`` is checked by :meth:`check_physical`,
    which the perturbative layer calls; the Hamiltonian builder accepts any
    sign so spectral symmetries can be probed.
    """

    L: int
    N: int
    U: float
    J: float
    boundary: str = "open"
    omega: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.L < 1:
            raise DomainError(f"need L >= 1, got {self.L}")
        if self.N < 1:
            raise DomainError(f"need N >= 1, got {self.N}")
        _check_boundary(self.boundary)
        if self.boundary == "periodic" and self.L < 3:
            raise DomainError("periodic chains need L >= 3")
        omega = np.zeros(self.L) if self.omega is None else np.asarray(self.omega, dtype=float)
        if omega.shape != (self.L,):
            raise DomainError(f"omega must have length {self.L}, got shape {omega.shape}")
        omega = omega.copy()
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    def check_physical(self) -> "ModelParams":
        if not self.U > 0:
            raise DomainError(f"attractive model needs U > 0, got {self.U}")
        if self.J < 0:
            raise DomainError(f"hopping must be non-negative, got J={self.J}")
        return self

    @classmethod
    def from_scaled(cls, L, N, tau, sigma=None, boundary="open", U=1.0):
        """Build parameters from scaled hopping ``tau`` and on-site energies ``sigma``."""
        if N < 2:
            raise DomainError("scaled units need N >= 2")
        unit = U * (N - 1)
        sigma = np.zeros(L) if sigma is None else np.asarray(sigma, dtype=float)
        return cls(L=L, N=N, U=U, J=tau * unit, boundary=boundary, omega=sigma * unit)

    @property
    def tau(self) -> float:
        return scale(self).tau

    @property
    def sigma(self) -> np.ndarray:
        return scale(self).sigma


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless view: energies in units of ``hbar U N (N-1)``,
    frequencies in units of ``U (N-1)``."""

    tau: float
    delta: float
    sigma: np.ndarray = field(repr=False)
    epsilon_unit: float

    def epsilon(self, energy: float) -> float:
        return energy / self.epsilon_unit


def scale(params: ModelParams, D: float = 0.0) -> ScaledParams:
    """Convert to scaled units ``tau = J/U(N-1)``, ``delta = D/U(N-1)``."""
    if params.N < 2:
        raise DomainError("scaled units are undefined for N = 1")
    unit = params.U * (params.N - 1)
    return ScaledParams(
        tau=params.J / unit,
        delta=D / unit,
        sigma=params.omega / unit,
        epsilon_unit=params.U * params.N * (params.N - 1),
    )


def disorder_rng(seed) -> np.random.Generator:
    """Generator keyed by an int or a tuple of ints such as
    ``(master_seed, cell_index, realization)``.

    Uses ``SeedSequence`` hashing, so every key gives an independent stream
    regardless of the order in which keys are drawn.
    """
    key = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    return np.random.default_rng(np.random.SeedSequence(key))


def sample_disorder(L: int, D: float, seed) -> np.ndarray:
    """Draw ``L`` on-site detunings uniformly from ``[-D, D]``.

    The sample mean is kept: at fixed N it only shifts the spectrum.
    """
    if D < 0:
        raise DomainError(f"disorder strength must be non-negative, got {D}")
    if D == 0:
        return np.zeros(L)
    return disorder_rng(seed).uniform(-D, D, size=L)


def bonds(L: int, boundary: str = "open") -> list[tuple[int, int]]:
    """Nearest-neighbour bonds ``(l, l+1)``; periodic chains add ``(L-1, 0)``."""
    _check_boundary(boundary)
    out = [(l, l + 1) for l in range(L - 1)]
    if boundary == "periodic" and L > 2:
        out.append((L - 1, 0))
    return out


def _hop_entries(basis: SectorBasis, pairs: Sequence[tuple[int, int]]):
    """Rows, columns and bare amplitudes of ``a_dst^dag a_src`` over `pairs`."""
    states = basis.states
    rows, cols, vals = [], [], []
    for src, dst in pairs:
        idx = np.flatnonzero(states[:, src] > 0)
        if idx.size == 0:
            continue
        new = states[idx].copy()
        amp = np.sqrt(new[:, src] * (new[:, dst] + 1.0))
        new[:, src] -= 1
        new[:, dst] += 1
        rows.append(basis.rank_many(new))
        cols.append(idx)
        vals.append(amp)
    if not rows:
        return np.empty(0, int), np.empty(0, int), np.empty(0)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build_hamiltonian(params: ModelParams, basis: SectorBasis) -> sp.csr_matrix:
    """Assemble ``H / hbar`` as a symmetric CSR matrix in `basis`."""
    if (basis.L, basis.N) != (params.L, params.N):
        raise DomainError(
            f"basis (L={basis.L}, N={basis.N}) does not match params (L={params.L}, N={params.N})"
        )
    n = basis.states.astype(float)
    diag = n @ params.omega - 0.5 * params.U * (n * (n - 1.0)).sum(axis=1)
    pairs = []
    for a, b in bonds(params.L, params.boundary):
        pairs += [(a, b), (b, a)]
    rows, cols, vals = _hop_entries(basis, pairs)
    dim = basis.dimension
    r = np.concatenate([np.arange(dim), rows])
    c = np.concatenate([np.arange(dim), cols])
    v = np.concatenate([diag, params.J * vals])
    H = sp.coo_matrix((v, (r, c)), shape=(dim, dim)).tocsr()
    H.sum_duplicates()
    return H


def number_operator(basis: SectorBasis, site: int) -> sp.csr_matrix:
    """Diagonal matrix of ``n_site`` in `basis`."""
    if not 0 <= site < basis.L:
        raise DomainError(f"site {site} outside chain of length {basis.L}")
    return sp.diags(basis.states[:, site].astype(float), format="csr")


def write_matrix_market(path, H, comment: str = "") -> None:
    """Dump `H` in Matrix Market coordinate format."""
    from scipy.io import mmwrite

    mmwrite(str(path), sp.coo_matrix(H), comment=comment, field="real", symmetry="general")
