"""Perturbative ground states and energies of the attractive chain.

Three limits are covered, each for open and periodic chains:

* localized: all bosons on one site, dressed by single-boson hops
  (expansion in the hopping);
* W: superposition of fully occupied sites fixed by N-th order degenerate
  perturbation theory at zero disorder;
* superfluid: all bosons in the lowest hopping mode, dressed by disorder
  and interaction (expansion in 1/hopping).

Energies are scaled, ``eps = E / (hbar U N (N-1))``; hopping and disorder
enter through ``tau = J / U(N-1)`` and ``delta = D / U(N-1)``. State
vectors live in the position Fock basis of :mod:`bosehub.fock` and are
always renormalised.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import ceil, exp, lgamma, log, pi, sqrt

import numpy as np
from scipy.optimize import brentq

from .analysis import mode_fock_vector
from .errors import DegeneracyError, DomainError, RootError, SingularityError
from .fock import enumerate_basis
from .hamil import ModelParams, scale
from .modes import fourier_modes, reciprocal_modes

__all__ = [
    "PhaseEnergy",
    "WShape",
    "WState",
    "alpha",
    "boundary_loc_w",
    "boundary_sf_loc",
    "boundary_w_sf",
    "kN_coefficients",
    "localized_energy",
    "localized_energy_avg",
    "localized_site",
    "localized_state",
    "neighbors",
    "reciprocal_modes",
    "sf_coefficients",
    "sf_energy",
    "sf_energy_avg",
    "sf_state",
    "w_energy",
    "w_profile",
    "w_state",
]

_RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class PhaseEnergy:
    """Scaled energy of one phase at a given perturbative order."""

    epsilon: float
    order: int
    phase: str


@dataclass(frozen=True)
class WShape:
    """Amplitudes of a W superposition over fully occupied sites.

    ``coefficients[i]`` multiplies ``|n_{first_site + i} = N>``; sites are
    0-based, so ``first_site == ell_s`` on open chains.
    """

    ell_s: int
    L_d: int
    coefficients: np.ndarray = field(repr=False)

    @property
    def first_site(self) -> int:
        return self.ell_s


@dataclass(frozen=True)
class WState:
    """A W state with the case of the construction that produced it."""

    vector: np.ndarray = field(repr=False)
    shape: WShape
    case: str
    degenerate: bool = False


def alpha(N: int) -> float:
    """``[(N-1)^(N-1) / (N-1)!]^(1/N)``; tends to e for large N."""
    if N < 2:
        raise DomainError(f"alpha(N) needs N >= 2, got {N}")
    return exp(((N - 1) * log(N - 1) - lgamma(N)) / N)


def neighbors(site: int, L: int, boundary: str = "open") -> list[int]:
    """Nearest neighbours of a 0-based site."""
    out = []
    if site > 0:
        out.append(site - 1)
    elif boundary == "periodic":
        out.append(L - 1)
    if site < L - 1:
        out.append(site + 1)
    elif boundary == "periodic":
        out.append(0)
    return out


def _scaled(params: ModelParams):
    params.check_physical()
    if params.N < 2:
        raise DomainError("perturbative states need N >= 2")
    return scale(params)


def _fock_index(basis, occ):
    return basis.rank(occ)


def _localized_denominators(sigma, site, L, boundary):
    out = []
    for nb in neighbors(site, L, boundary):
        d = (sigma[site] - sigma[nb]) - 1.0
        if abs(d) < _RESONANCE_TOL:
            raise SingularityError(
                f"resonant disorder: sigma[{site}] - sigma[{nb}] equals the interaction gap")
        out.append((nb, d))
    return out


def localized_energy(params: ModelParams, ell0: int | None = None) -> PhaseEnergy:
    """Second-order energy of the state localized on `ell0` for one disorder
    realization: ``-1/2 + sigma_0 + tau^2 sum_nb 1 / (sigma_0 - sigma_nb - 1)``."""
    s = _scaled(params)
    if ell0 is None:
        ell0 = localized_site(params)
    terms = _localized_denominators(s.sigma, ell0, params.L, params.boundary)
    eps = -0.5 + s.sigma[ell0] + s.tau**2 * sum(1.0 / d for _, d in terms)
    return PhaseEnergy(float(eps), 2, "localized")


def localized_site(params: ModelParams) -> int:
    """Site whose localized state has the lowest second-order energy.

    Reduces to the site of lowest on-site energy when disorder dominates
    ``tau^2``; at weak disorder it avoids chain ends, whose single
    neighbour gives a smaller hopping gain.
    """
    s = _scaled(params)
    best, best_eps = 0, np.inf
    for site in range(params.L):
        terms = _localized_denominators(s.sigma, site, params.L, params.boundary)
        eps = s.sigma[site] + s.tau**2 * sum(1.0 / d for _, d in terms)
        if eps < best_eps:
            best, best_eps = site, eps
    return best


def _dressed_site(vec, basis, site, weight, sigma, tau, N, boundary):
    """Add ``weight * |psi^1_site>`` (first-order localized state) into `vec`."""
    L = basis.L
    occ = np.zeros(L, dtype=np.int64)
    occ[site] = N
    vec[_fock_index(basis, occ)] += weight
    for nb, d in _localized_denominators(sigma, site, L, boundary):
        occ = np.zeros(L, dtype=np.int64)
        occ[site] = N - 1
        occ[nb] += 1
        vec[_fock_index(basis, occ)] += weight * tau * sqrt(N) / d


def localized_state(params: ModelParams, ell0: int | None = None) -> np.ndarray:
    """Normalised first-order localized state on site `ell0`.

    ``|n_ell0 = N>`` plus ``tau sqrt(N) / ((sigma_0 - sigma_nb) - 1)`` on each
    ``|n_ell0 = N-1, n_nb = 1>``. Defaults to :func:`localized_site`.

    Raises
    ------
    SingularityError
        If a denominator vanishes.
    """
    s = _scaled(params)
    if ell0 is None:
        ell0 = localized_site(params)
    if not 0 <= ell0 < params.L:
        raise DomainError(f"site {ell0} outside chain of length {params.L}")
    basis = enumerate_basis(params.L, params.N)
    vec = np.zeros(basis.dimension)
    _dressed_site(vec, basis, ell0, 1.0, s.sigma, s.tau, params.N, params.boundary)
    return vec / np.linalg.norm(vec)


def localized_energy_avg(tau: float, delta: float, L: int, n_terms: int = 1,
                         boundary: str = "open") -> PhaseEnergy:
    """Disorder-averaged second-order energy of the localized phase.

    The hopping correction is the series
    ``sum_{n=0}^{n_terms} (-1)^n L (2 delta)^n / ((n+1)(n+L))``;
    ``n_terms=1`` gives the familiar closed form
    ``-1/2 - delta (L-1)/(L+1) (1 - 2 tau^2) - 2 tau^2 (L-1)/L``.
    Periodic chains replace the mean neighbour count ``2(L-1)/L`` by 2.
    """
    if delta < 0:
        raise DomainError("delta must be non-negative")
    if n_terms < 1:
        raise DomainError("n_terms must be >= 1")
    if 2 * delta >= 1 and n_terms > 1:
        warnings.warn(f"localized series diverges for 2*delta = {2 * delta:.3g} >= 1; "
                      "returning the partial sum", RuntimeWarning, stacklevel=2)
    series = sum((-1) ** n * L * (2 * delta) ** n / ((n + 1) * (n + L)) for n in range(n_terms + 1))
    neighbours = 2.0 * (L - 1) / L if boundary == "open" else 2.0
    eps = -0.5 - delta * (L - 1) / (L + 1) - tau**2 * neighbours * series
    return PhaseEnergy(float(eps), 2, "localized")


def kN_coefficients(N: int, tau: float, U: float = 1.0, boundary: str = "open"):
    """Off-diagonal ``b`` and corner shift ``c`` of the N-th order effective
    Hamiltonian coupling the fully occupied sites.

    ``|b| = U N (N-1) [alpha(N) tau]^N`` and ``c = U N (N-1) tau^N``. The
    sign of ``b`` is ``(-1)^(N-1)``: an N-boson hop through N-1 virtual
    states each below the manifold by the interaction gap. The diagonal
    shift ``c`` appears only for even N on open chains.
    """
    if N < 2:
        raise DomainError("N must be >= 2")
    if boundary not in ("open", "periodic"):
        raise DomainError(f"unknown boundary {boundary!r}")
    mag = U * N * (N - 1) * exp((N - 1) * log(N - 1) - lgamma(N)) * tau**N
    b = (-1) ** (N - 1) * mag
    c = U * N * (N - 1) * tau**N
    return b, c


def _theta_root(L_d: int, ratio: float) -> float:
    """Smallest positive root of cos((L_d+1) t/2) + ratio cos((L_d-1) t/2)."""
    g = lambda t: np.cos((L_d + 1) * t / 2) + ratio * np.cos((L_d - 1) * t / 2)
    lo, hi = 0.0, pi / L_d
    if g(hi) > 0:
        raise RootError(f"no theta root in (0, pi/{L_d}] for |c/b| = {ratio}")
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def w_profile(L: int, N: int, boundary: str = "open", profile: str = "c0",
              tau: float = 0.1):
    """Zeroth-order W amplitudes over the fully occupied sites.

    Returns ``(WShape, case, degenerate)``. `profile` selects, for even
    ``N > 2`` on open chains, the ``c = 0`` sine (``"c0"``) or the exact
    solution with ``0 < c < |b|`` (``"exact"``).
    """
    if N < 2:
        raise DomainError("W states need N >= 2")
    if boundary == "periodic":
        ell = np.arange(1, L + 1)
        degenerate = False
        if N % 2 == 0:
            coeff, case = np.ones(L), "periodic-uniform"
        elif L % 2 == 0:
            coeff, case = (-1.0) ** ell, "periodic-alternating"
        else:
            # real part of the exp(+i pi l / L) member of the degenerate pair
            coeff, case, degenerate = (-1.0) ** ell * np.cos(pi * ell / L), "periodic-degenerate", True
        return WShape(0, L, coeff / np.linalg.norm(coeff)), case, degenerate
    if boundary != "open":
        raise DomainError(f"unknown boundary {boundary!r}")

    h = ceil(N / 2)
    if L <= 2 * h:
        if L % 2:
            return WShape((L - 1) // 2, 1, np.ones(1)), "single-middle", False
        coeff = np.array([1.0, (-1.0) ** N]) / sqrt(2)
        return WShape(L // 2 - 1, 2, coeff), "two-middle", False

    ell_s = h - 1
    L_d = L - 2 * ell_s
    ell = np.arange(1, L_d + 1)
    if N % 2:
        coeff, case = (-1.0) ** ell * np.sin(pi * ell / (L_d + 1)), "odd-N"
    elif N == 2:
        coeff, case = np.sin(pi * (2 * ell - 1) / (2 * L_d)), "N=2"
    elif profile == "c0":
        coeff, case = np.sin(pi * ell / (L_d + 1)), "even-N-c0"
    elif profile == "exact":
        b, c = kN_coefficients(N, tau)
        theta = _theta_root(L_d, abs(c / b))
        coeff, case = c * np.sin((ell - 1) * theta) - b * np.sin(ell * theta), "even-N-exact"
    else:
        raise DomainError(f"unknown W profile {profile!r}")
    return WShape(ell_s, L_d, coeff / np.linalg.norm(coeff)), case, False


def w_state(params: ModelParams, profile: str = "c0") -> WState:
    """Normalised W state: the zeroth-order profile of :func:`w_profile`
    applied to disorder-free first-order localized states.

    Disorder in `params` is ignored.
    """
    s = _scaled(params)
    shape, case, degenerate = w_profile(params.L, params.N, params.boundary, profile, s.tau)
    basis = enumerate_basis(params.L, params.N)
    vec = np.zeros(basis.dimension)
    zero = np.zeros(params.L)
    for i, c in enumerate(shape.coefficients):
        if c != 0:
            _dressed_site(vec, basis, shape.first_site + i, c, zero, s.tau, params.N, params.boundary)
    return WState(vec / np.linalg.norm(vec), shape, case, degenerate)


def w_energy(tau: float) -> PhaseEnergy:
    """Mean second-order W energy ``-1/2 - 2 tau^2`` (disorder averages out)."""
    return PhaseEnergy(-0.5 - 2.0 * tau**2, 2, "w")


def _sf_open_terms(L, N, tau, sigma):
    """Mode-occupation labels and amplitudes of the open-chain superfluid
    state to first order (mode labels 1-based, amplitudes relative to the
    condensate)."""
    kx = pi / (L + 1)
    c1 = np.cos(kx)
    cos = lambda k: np.cos(k * kx)
    ell = np.arange(1, L + 1)
    sinL = np.sin(kx * ell * L)
    inter = 1.0 / (tau * (N - 1))  # U / J
    terms = []

    def occ(**modes):
        eta = np.zeros(L, dtype=np.int64)
        for k, n in modes.items():
            eta[int(k[1:]) - 1] += n
        return eta

    for k in range(1, L):
        proj = np.sum(sigma * np.sin(kx * ell * k) * sinL)
        amp = -sqrt(N) / (tau * (L + 1)) * proj / (c1 + cos(k))
        if amp != 0:
            terms.append((occ(**{f"k{k}": 1, f"k{L}": N - 1}), amp))
    if N >= 2:
        pref = inter * sqrt(N * (N - 1)) / (8 * (L + 1))
        for k in range(1, L):
            amp = pref * sqrt(2) * (2 + (k == 1)) / (2 * (c1 + cos(k)))
            terms.append((occ(**{f"k{k}": 2, f"k{L}": N - 2}), amp))
        if L >= 3:
            amp = -pref * 2 * sqrt(N - 1) / (c1 + cos(L - 2))
            terms.append((occ(**{f"k{L - 2}": 1, f"k{L}": N - 1}), amp))
        for k in range(1, L - 2):
            amp = -pref * 2 / (2 * c1 + cos(k) + cos(k + 2))
            terms.append((occ(**{f"k{k}": 1, f"k{k + 2}": 1, f"k{L}": N - 2}), amp))
    return terms


def _sf_periodic_terms(L, N, tau, sigma):
    k0 = L // 2
    ell = np.arange(1, L + 1)
    inter = 1.0 / (tau * (N - 1))
    terms = []

    def occ(pairs):
        eta = np.zeros(L, dtype=np.int64)
        for k, n in pairs:
            eta[k - 1] += n
        return eta

    for k in range(1, L + 1):
        if k == k0:
            continue
        proj = np.sum(sigma * (-1.0) ** ell * np.exp(-2j * pi * ell * k / L))
        amp = -sqrt(N) / (2 * tau * L) * proj / (1 + np.cos(2 * pi * k / L))
        terms.append((occ([(k, 1), (k0, N - 1)]), amp))
    if N >= 2:
        pref = inter * sqrt(N * (N - 1)) / (4 * L)
        terms.append((occ([(k0, N - 2), (L, 2)]), pref / (2 * sqrt(2))))
        for k in range(1, k0):
            terms.append((occ([(k, 1), (k0, N - 2), (L - k, 1)]), pref / (1 + np.cos(2 * pi * k / L))))
    return terms


def sf_state(params: ModelParams) -> np.ndarray:
    """Normalised first-order superfluid state in the position basis.

    All bosons in the lowest hopping mode (``k = L`` open, ``k = L/2``
    periodic), corrected by single excitations from disorder and by pair
    excitations from the interaction.

    Raises
    ------
    DegeneracyError
        For periodic chains with odd ``L`` (degenerate lowest mode).
    """
    s = _scaled(params)
    if not s.tau > 0:
        raise DomainError("superfluid expansion needs J > 0")
    L, N = params.L, params.N
    if params.boundary == "periodic":
        if L % 2:
            raise DegeneracyError("periodic chain with odd L has a degenerate superfluid ground state")
        modes = fourier_modes(L)
        k0 = L // 2
        terms = _sf_periodic_terms(L, N, s.tau, s.sigma)
    else:
        modes = reciprocal_modes(L, "open")
        k0 = L
        terms = _sf_open_terms(L, N, s.tau, s.sigma)
    eta0 = np.zeros(L, dtype=np.int64)
    eta0[k0 - 1] = N
    vec = mode_fock_vector(L, eta0, modes).astype(complex)
    for eta, amp in terms:
        if amp != 0:
            vec += amp * mode_fock_vector(L, eta, modes)
    # the periodic construction is real up to rounding: +-k terms pair up
    if np.max(np.abs(vec.imag)) > 1e-9 * np.max(np.abs(vec.real)):
        raise AssertionError("superfluid state acquired an imaginary part")
    vec = vec.real
    return vec / np.linalg.norm(vec)


def _sf_u_bracket(L, N):
    c1 = np.cos(pi / (L + 1))
    s2 = np.sin(pi / (L + 1)) ** 2
    return ((15 + 4 * L * (L + 2)) / (6 * c1)
            + (6 * c1**2 - 5) / (s2 * c1)
            + 4 * (N - 1) / (c1 - np.cos(3 * pi / (L + 1))))


def sf_coefficients(L: int, N: int, boundary: str = "open"):
    """``(a, b)`` in ``eps_SF = eps_0 + eps_1 - (a / tau) (delta^2 + b)``."""
    if N < 2:
        raise DomainError("N must be >= 2")
    if boundary == "open":
        c1 = np.cos(pi / (L + 1))
        s2 = np.sin(pi / (L + 1)) ** 2
        a = (5 * c1**2 + 1) / (24 * (L + 1) * c1 * s2)
        ab = _sf_u_bracket(L, N) / (32 * (L + 1) ** 2 * (N - 1))
    else:
        if L % 2:
            raise DegeneracyError("periodic superfluid expansion needs even L")
        a = (L**2 - 1) / (36 * L)
        ab = (L**2 - 1) / (48 * (N - 1) * L**2)
    return float(a), float(ab / a)


def sf_energy_avg(tau: float, delta: float, L: int, N: int, boundary: str = "open") -> PhaseEnergy:
    """Disorder-averaged second-order superfluid energy.

    Open: ``-2 tau cos(pi/(L+1)) - 3/(4(L+1)) - (a/tau)(delta^2 + b)``.
    Periodic (even L): ``-2 tau - 1/(2L) - (a/tau)(delta^2 + b)``.
    """
    if not tau > 0:
        raise DomainError("superfluid energy needs tau > 0")
    a, b = sf_coefficients(L, N, boundary)
    if boundary == "open":
        base = -2 * tau * np.cos(pi / (L + 1)) - 3 / (4 * (L + 1))
    else:
        base = -2 * tau - 1 / (2 * L)
    return PhaseEnergy(float(base - a / tau * (delta**2 + b)), 2, "superfluid")


def sf_energy(params: ModelParams) -> PhaseEnergy:
    """Second-order superfluid energy for one disorder realization."""
    s = _scaled(params)
    if not s.tau > 0:
        raise DomainError("superfluid energy needs J > 0")
    L, N, tau, sigma = params.L, params.N, s.tau, s.sigma
    ell = np.arange(1, L + 1)
    if params.boundary == "open":
        kx = pi / (L + 1)
        c1 = np.cos(kx)
        sinL = np.sin(kx * ell * L)
        eps0 = -2 * tau * c1
        eps1 = 2 / (L + 1) * np.sum(sigma * np.sin(kx * ell) ** 2) - 3 / (4 * (L + 1))
        dis = sum(np.sum(sigma * np.sin(kx * ell * k) * sinL) ** 2 / (c1 + np.cos(kx * k))
                  for k in range(1, L))
        eps2 = -2 / (tau * (L + 1) ** 2) * dis
        eps2 -= _sf_u_bracket(L, N) / (32 * tau * (N - 1) * (L + 1) ** 2)
        if L >= 3:
            cross = np.sum(sigma * sinL * np.sin(kx * ell * (L - 2))) / (c1 + np.cos(kx * (L - 2)))
            eps2 -= cross / (tau * (L + 1) ** 2)
    else:
        if L % 2:
            raise DegeneracyError("periodic superfluid expansion needs even L")
        eps0 = -2 * tau
        eps1 = np.sum(sigma) / L - 1 / (2 * L)
        dis = 0.0
        for k in range(1, L + 1):
            if k == L // 2:
                continue
            proj = np.sum(sigma * (-1.0) ** ell * np.exp(2j * pi * k * ell / L))
            dis += abs(proj) ** 2 / (1 + np.cos(2 * pi * k / L))
        eps2 = -(L**2 - 1) / (48 * tau * (N - 1) * L**2) - dis / (2 * tau * L**2)
    return PhaseEnergy(float(eps0 + eps1 + eps2), 2, "superfluid")


def boundary_loc_w(tau: float, N: int, A: float = 4.0 / 3.0) -> float:
    """Localized-to-W boundary ``delta = (3A/2) [alpha(N) tau]^N``
    (``2 [alpha tau]^N`` for the default ``A = 4/3``)."""
    return float(1.5 * A * (alpha(N) * tau) ** N)


def _sf_crossing(other, delta, L, N, boundary, bracket, n_scan):
    """Smallest tau in `bracket` where eps_SF drops below `other(tau)` with
    increasing tau."""
    lo, hi = bracket
    if not 0 < lo < hi:
        raise DomainError(f"invalid bracket {bracket}")
    f = lambda t: sf_energy_avg(t, delta, L, N, boundary).epsilon - other(t)
    grid = np.geomspace(lo, hi, n_scan)
    vals = np.array([f(t) for t in grid])
    for i in range(n_scan - 1):
        if vals[i] > 0 and vals[i + 1] <= 0:
            if vals[i + 1] == 0:
                return float(grid[i + 1])
            return float(brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    raise RootError(f"superfluid energy never crosses below the competing phase in tau in {bracket}")


def boundary_w_sf(delta: float, L: int, N: int, boundary: str = "open",
                  bracket=(0.01, 10.0), n_scan: int = 400) -> float:
    """W-to-superfluid boundary: ``eps_W(tau) = eps_SF(tau, delta)``.

    Both energies are truncated expansions, so the difference can change
    sign more than once; the returned root is the smallest ``tau`` where
    the superfluid energy falls below the W energy as ``tau`` increases.
    """
    return _sf_crossing(lambda t: w_energy(t).epsilon, delta, L, N, boundary, bracket, n_scan)


def boundary_sf_loc(delta: float, L: int, N: int, boundary: str = "open",
                    bracket=(0.01, 10.0), n_scan: int = 400, n_terms: int = 1) -> float:
    """Localized-to-superfluid boundary: ``eps_loc(tau, delta) = eps_SF(tau, delta)``,
    taking the smallest ``tau`` where the superfluid becomes lower."""
    other = lambda t: localized_energy_avg(t, delta, L, n_terms, boundary).epsilon
    return _sf_crossing(other, delta, L, N, boundary, bracket, n_scan)
