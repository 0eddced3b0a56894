"""Fixed-particle-number Fock basis for bosons on a chain.

Basis states are occupation vectors ``(n_0, ..., n_{L-1})`` with
``sum(n) == N``, stored in *lexicographically decreasing* order, so for
``L=3, N=2`` the basis reads::

    (2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2)

Sites are 0-based throughout the package. State-vector files index into
this ordering (tag ``"lexdesc"``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, sqrt

import numpy as np

from .errors import CapacityError, DomainError

__all__ = [
    "MAX_DIMENSION",
    "ORDER_TAG",
    "SectorBasis",
    "apply_hop",
    "basis_size",
    "enumerate_basis",
]

MAX_DIMENSION = 2**31
ORDER_TAG = "lexdesc"


def basis_size(L: int, N: int) -> int:
    """Number of ways to put `N` bosons on `L` sites, ``C(L+N-1, N)``.

    Raises
    ------
    CapacityError
        If the dimension exceeds ``MAX_DIMENSION``.
    """
    if L < 1:
        raise DomainError(f"need at least one site, got L={L}")
    if N < 0:
        raise DomainError(f"boson number must be non-negative, got N={N}")
    dim = comb(L + N - 1, N)
    if dim > MAX_DIMENSION:
        raise CapacityError(f"sector (L={L}, N={N}) has dimension {dim} > {MAX_DIMENSION}")
    return dim


@lru_cache(maxsize=None)
def _states(L: int, N: int) -> np.ndarray:
    if L == 1:
        return np.array([[N]], dtype=np.int64)
    blocks = []
    for first in range(N, -1, -1):
        rest = _states(L - 1, N - first)
        head = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Ordered basis of the ``N``-boson sector on ``L`` sites.

    Use :func:`enumerate_basis` to construct one. Instances are immutable
    and may be shared between threads.
    """

    L: int
    N: int
    states: np.ndarray = field(repr=False)
    _binom: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.states.shape[0]

    def __len__(self) -> int:
        return self.dimension

    def _check_state(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.int64)
        if s.shape != (self.L,):
            raise DomainError(f"state must have length {self.L}, got shape {s.shape}")
        if (s < 0).any():
            raise DomainError(f"negative occupation in {tuple(s)}")
        if s.sum() != self.N:
            raise DomainError(f"occupations {tuple(s)} do not sum to N={self.N}")
        return s

    def rank(self, s) -> int:
        """Index of occupation vector `s` in the basis (O(L), no search)."""
        s = self._check_state(s)
        return int(self.rank_many(s[None, :])[0])

    def rank_many(self, states: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`rank` for an ``(m, L)`` array of valid states.

        No validation is done here; callers pass states they generated.
        """
        states = np.asarray(states, dtype=np.int64)
        # bosons still to place before each site
        remaining = self.N - np.cumsum(states, axis=1) + states
        gap = remaining[:, :-1] - states[:, :-1]
        # number of later states with a larger occupation at site i is
        # C(gap - 1 + m, m), m = sites after i (hockey-stick identity)
        m = np.arange(self.L - 1, 0, -1)
        idx = np.clip(gap - 1 + m, 0, None)
        terms = np.where(gap >= 1, self._binom[idx, m], 0)
        return terms.sum(axis=1)

    def unrank(self, i: int) -> np.ndarray:
        """Occupation vector at basis index `i`."""
        if not 0 <= i < self.dimension:
            raise DomainError(f"index {i} outside [0, {self.dimension})")
        out = np.zeros(self.L, dtype=np.int64)
        remaining = self.N
        for site in range(self.L - 1):
            m = self.L - 1 - site
            # states with n_site = v come in blocks of C(remaining - v + m - 1, m - 1)
            for v in range(remaining, -1, -1):
                block = int(self._binom[remaining - v + m - 1, m - 1])
                if i < block:
                    break
                i -= block
            out[site] = v
            remaining -= v
        out[-1] = remaining
        return out

    def index_of(self) -> dict:
        """Dictionary ``tuple(state) -> index``; convenient for small sectors."""
        return {tuple(int(x) for x in s): i for i, s in enumerate(self.states)}


def enumerate_basis(L: int, N: int) -> SectorBasis:
    """Enumerate the ``N``-boson sector on ``L`` sites.

    Examples
    --------
    >>> enumerate_basis(2, 2).states.tolist()
    [[2, 0], [1, 1], [0, 2]]
    """
    dim = basis_size(L, N)
    states = _states(L, N).copy()
    states.setflags(write=False)
    assert states.shape[0] == dim
    size = L + N + 1
    binom = np.zeros((size, max(L, 1)), dtype=np.int64)
    for a in range(size):
        for b in range(min(a, L - 1) + 1):
            binom[a, b] = comb(a, b)
    binom.setflags(write=False)
    return SectorBasis(L=L, N=N, states=states, _binom=binom)


def apply_hop(s, src: int, dst: int):
    """Apply ``a_dst^dagger a_src`` to the Fock state `s`.

    Returns
    -------
    tuple or None
        ``(new_state, amplitude)`` with amplitude ``sqrt(n_src * (n_dst + 1))``,
        or ``None`` if site `src` is empty.
    """
    s = np.asarray(s, dtype=np.int64)
    L = s.shape[0]
    if src == dst:
        raise DomainError("hop requires distinct sites")
    if not (0 <= src < L and 0 <= dst < L):
        raise DomainError(f"sites ({src}, {dst}) outside chain of length {L}")
    if s[src] == 0:
        return None
    out = s.copy()
    amp = sqrt(out[src] * (out[dst] + 1))
    out[src] -= 1
    out[dst] += 1
    return out, amp
