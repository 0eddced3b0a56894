"""Acceptance criteria 1-11 at their stated scale and tolerance.

Each test records one PASS/FAIL line, shown in the terminal summary, before
asserting. Criteria 5, 6 and 3-4 are ensemble scans and dominate runtime;
set BOSEHUB_WORKERS to parallelize them.
"""

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from bosehub.analysis import critical_tau, ipr, overlap, reciprocal_fock_basis
from bosehub.eigen import dense_ground_state, dense_spectrum, ground_state
from bosehub.ensemble import EnsembleSpec, critical_tau_sweep, log_grid, phase_diagram
from bosehub.fock import enumerate_basis
from bosehub.hamil import ModelParams, build_hamiltonian, sample_disorder
from bosehub.pert import (alpha, localized_energy, localized_state, sf_coefficients, sf_energy_avg,
                          sf_state, w_state)


def report(key, ok, detail):
    line = f"criterion {key:<3} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    assert ok, line


def scaled_ground(L, N, tau, delta=0.0, seed=0, boundary="open", dense=False):
    omega = sample_disorder(L, delta * (N - 1), seed)
    p = ModelParams(L=L, N=N, U=1.0, J=tau * (N - 1), omega=omega, boundary=boundary)
    H = build_hamiltonian(p, enumerate_basis(L, N))
    gs = dense_ground_state(H) if dense else ground_state(H)
    return p, gs.vector, gs.energy / (N * (N - 1))


def test_1_solver_matches_dense_oracle():
    rng = np.random.default_rng(2024)
    worst_e = worst_o = 0.0
    for i in range(50):
        L, N = [(3, 2), (4, 3), (5, 2)][i % 3]
        boundary = "periodic" if rng.random() < 0.5 else "open"
        U = rng.uniform(-2, 2)
        J = rng.uniform(-1, 1)
        omega = rng.uniform(-1, 1, L) * rng.uniform(0.05, 1)
        H = build_hamiltonian(ModelParams(L=L, N=N, U=U, J=J, omega=omega, boundary=boundary),
                              enumerate_basis(L, N))
        ref, got = dense_ground_state(H), ground_state(H, seed=i)
        worst_e = max(worst_e, abs(ref.energy - got.energy))
        worst_o = max(worst_o, 1 - overlap(ref.vector, got.vector))
    report("1", worst_e < 1e-8 and worst_o < 1e-8,
           f"50 draws: max |dE| = {worst_e:.1e}, max 1-overlap^2 = {worst_o:.1e}")


def test_2_spectral_symmetries():
    b = enumerate_basis(4, 3)
    omega = np.array([0.3, -0.2, 0.1, 0.05])
    worst = 0.0
    for boundary in ("open", "periodic"):
        def spectrum_of(U, J, w):
            return dense_spectrum(build_hamiltonian(ModelParams(L=4, N=3, U=U, J=J, omega=w, boundary=boundary), b))
        base = spectrum_of(1.0, 0.7, omega)
        worst = max(worst, np.abs(base - spectrum_of(1.0, -0.7, omega)).max())
        worst = max(worst, np.abs(np.sort(-base) - spectrum_of(-1.0, 0.7, -omega)).max())
    report("2", worst < 1e-10, f"J sign flip and U,omega duality: max deviation {worst:.1e}")


def _ipr_crossovers(delta):
    spec = EnsembleSpec(8, 4, tau_grid=log_grid(0.05, 2.0, 30), delta_grid=(delta,), realizations=200)
    g = phase_diagram(spec)
    return (critical_tau(spec.tau_grid, g.mean["ipr_s"][0]),
            critical_tau(spec.tau_grid, g.mean["ipr_r"][0]))


def test_3_weak_disorder_crossovers():
    ts, tr = _ipr_crossovers(0.001)
    report("3", abs(ts - 0.11) <= 0.02 and abs(tr - 0.17) <= 0.02,
           f"delta=0.001: tau_c^s = {ts:.4f} (0.11+-0.02), tau_c^r = {tr:.4f} (0.17+-0.02)")


def test_4_strong_disorder_crossover():
    ts, tr = _ipr_crossovers(0.036)
    report("4", abs(ts - 0.23) <= 0.03 and abs(tr - 0.23) <= 0.03,
           f"delta=0.036: tau_c^s = {ts:.4f}, tau_c^r = {tr:.4f} (both 0.23+-0.03)")


def _w_region(n_tau, n_delta, realizations):
    spec = EnsembleSpec(8, 4, tau_grid=log_grid(0.05, 2.0, n_tau), delta_grid=log_grid(1e-4, 1.0, n_delta),
                        realizations=realizations)
    g = phase_diagram(spec)
    both = (g.mean["ipr_s"] > 0.2) & (g.mean["ipr_r"] > 0.2)
    deltas = np.asarray(spec.delta_grid)[np.any(both, axis=1)]
    top = float(deltas.max()) if deltas.size else float("nan")
    return both.sum(), top, float(np.minimum(g.mean["ipr_s"], g.mean["ipr_r"])[
        np.asarray(spec.delta_grid) > 0.05].max())


@pytest.mark.slow
def test_5_w_region_is_confined_to_weak_disorder():
    n, top, worst = _w_region(40, 40, 100)
    n_s, top_s, _ = _w_region(20, 20, 50)
    ok = n > 0 and top <= 0.05 and n_s > 0 and top_s <= 0.05
    report("5", ok, f"40x40x100: {n} W cells, largest delta {top:.3g}, max min(P_s,P_r) above 0.05 = "
                    f"{worst:.3f}; 20x20x50 smoke: {n_s} cells, largest delta {top_s:.3g} (need <= 0.05)")


@pytest.mark.slow
def test_6_w_fragility_law():
    spec = EnsembleSpec(8, 4, tau_grid=log_grid(0.03, 0.6, 40), delta_grid=log_grid(1e-4, 1e-2, 9),
                        realizations=200)
    rows, _ = critical_tau_sweep(spec, [4, 5, 6])
    ratios = [d / (2 * (alpha(N) * ts) ** N) for N, d, ts, _ in rows]
    lo, hi = min(ratios), max(ratios)
    report("6", 0.5 <= lo and hi <= 2.0,
           f"N=4,5,6 x 9 deltas: delta / 2[alpha tau_c^s]^N in [{lo:.3f}, {hi:.3f}] (need [0.5, 2])")


def test_7a_w_energy():
    tau = 0.05
    _, _, eps = scaled_ground(8, 4, tau)
    err = abs(eps - (-0.5 - 2 * tau**2))
    report("7a", err < 10 * tau**4, f"tau=0.05: |eps - (-1/2 - 2tau^2)| = {err:.3e} (bound {10 * tau**4:.3e})")


def test_7b_superfluid_energy():
    _, _, eps = scaled_ground(8, 4, 1.0)
    err = abs(eps - sf_energy_avg(1.0, 0.0, 8, 4).epsilon)
    report("7b", err < 5e-3, f"tau=1: |eps - eps_SF| = {err:.2e} (need < 5e-3)")


def test_7c_localized_energy():
    worst = 0.0
    for r in range(20):
        p, _, eps = scaled_ground(8, 4, 0.02, 0.5, seed=r)
        worst = max(worst, abs(eps - localized_energy(p).epsilon))
    report("7c", worst < 1e-3, f"tau=0.02, delta=0.5, 20 draws: max |eps - eps_loc| = {worst:.2e}")


def test_8_superfluid_coefficients():
    a, b = sf_coefficients(8, 4)
    report("8", abs(a - 0.23) <= 0.02 and abs(b - 0.05) <= 0.02, f"a = {a:.4f} (0.23+-0.02), b = {b:.4f} (0.05+-0.02)")


def test_9_fidelities_single_realization():
    seed, delta = 0, 3.3e-4
    fid = {}
    for name, tau, build in (("localized", 0.05, localized_state), ("w", 0.15, lambda p: w_state(p).vector),
                             ("superfluid", 1.0, sf_state)):
        p, psi, _ = scaled_ground(8, 4, tau, delta, seed=seed)
        fid[name] = overlap(psi, build(p))
    report("9", min(fid.values()) > 0.9,
           "seed 0: " + ", ".join(f"{k} {v:.4f}" for k, v in fid.items()) + " (each > 0.9)")


def test_10_reciprocal_machinery():
    gram = 0.0
    for boundary in ("open", "periodic"):
        G = reciprocal_fock_basis(enumerate_basis(4, 2), boundary)
        gram = max(gram, np.abs(G.conj().T @ G - np.eye(G.shape[1])).max())
    b = enumerate_basis(4, 3)
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(20):
        psi = rng.standard_normal(b.dimension)
        psi /= np.linalg.norm(psi)
        worst = max(worst, abs(ipr(psi, b, "reciprocal", method="one_body") - ipr(psi, b, "reciprocal", method="fock")))
    report("10", gram < 1e-10 and worst < 1e-10, f"Gram deviation {gram:.1e}, P_r two-way deviation {worst:.1e}")


def test_11_periodic_variants():
    p, psi, _ = scaled_ground(8, 4, 0.1, boundary="periodic", dense=True)
    fw = overlap(psi, w_state(p).vector)
    _, _, eps = scaled_ground(8, 4, 2.0, boundary="periodic")
    err = abs(eps - sf_energy_avg(2.0, 0.0, 8, 4, "periodic").epsilon)
    report("11", fw > 0.95 and err < 5e-3, f"periodic W overlap^2 {fw:.4f} (> 0.95), |eps - eps_SF| at tau=2 {err:.2e}")
