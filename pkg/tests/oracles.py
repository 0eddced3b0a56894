"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's basis ranking or Hamiltonian builder.
"""

from __future__ import annotations

import itertools
from math import factorial, sqrt

import numpy as np


def brute_basis(L, N):
    """All occupation tuples summing to N, sorted lexicographically descending."""
    states = [s for s in itertools.product(range(N + 1), repeat=L) if sum(s) == N]
    return sorted(states, reverse=True)


def dense_hamiltonian(L, N, U, J, omega=None, boundary="open"):
    """Dense H/hbar from explicit operator action on occupation tuples."""
    omega = np.zeros(L) if omega is None else np.asarray(omega, float)
    states = brute_basis(L, N)
    index = {s: i for i, s in enumerate(states)}
    H = np.zeros((len(states), len(states)))
    links = [(l, l + 1) for l in range(L - 1)]
    if boundary == "periodic":
        links.append((L - 1, 0))
    for i, s in enumerate(states):
        H[i, i] = sum(omega[l] * s[l] - 0.5 * U * s[l] * (s[l] - 1) for l in range(L))
        for a, b in links:
            for src, dst in ((a, b), (b, a)):
                if s[src] == 0:
                    continue
                t = list(s)
                amp = sqrt(t[src] * (t[dst] + 1))
                t[src] -= 1
                t[dst] += 1
                H[index[tuple(t)], i] += J * amp
    return H, states


def mode_state(L, N, eta, modes):
    """prod_k (c_k^dag)^eta_k / sqrt(eta_k!) |0> expanded by multinomial sums."""
    states = brute_basis(L, N)
    index = {s: i for i, s in enumerate(states)}
    vec = np.zeros(len(states), dtype=complex)
    ops = [k for k, n in enumerate(eta) for _ in range(n)]
    norm = np.prod([sqrt(factorial(n)) for n in eta])
    for sites in itertools.product(range(L), repeat=N):
        amp = np.prod([modes[k, l] for k, l in zip(ops, sites)])
        occ = [0] * L
        for l in sites:
            occ[l] += 1
        # (a^dag)^n |0> = sqrt(n!) |n>; every ordered tuple is one term
        vec[index[tuple(occ)]] += amp * np.prod([sqrt(factorial(n)) for n in occ])
    return vec / norm


def first_order_state(H0, V, ref):
    """|0> + sum_m <m|V|0> / (E0 - Em) |m> in the eigenbasis of a diagonal H0.

    `H0` is a 1-D array of unperturbed energies, `V` a dense matrix in the
    same basis, `ref` the index of the (non-degenerate) reference state.
    Degenerate partners of `ref` must not couple through V.
    """
    e0 = H0[ref]
    out = np.zeros(len(H0), dtype=V.dtype)
    out[ref] = 1.0
    for m in range(len(H0)):
        if m == ref or V[m, ref] == 0:
            continue
        gap = e0 - H0[m]
        if abs(gap) < 1e-12:
            raise ValueError("degenerate coupling in first-order oracle")
        out[m] = V[m, ref] / gap
    return out


def second_order_energy(H0, V, ref):
    e0 = H0[ref]
    tot = 0.0
    for m in range(len(H0)):
        if m != ref and V[m, ref] != 0:
            tot += abs(V[m, ref]) ** 2 / (e0 - H0[m])
    return float(np.real(V[ref, ref])) + float(tot)
