"""How well the closed-form energies track exact diagonalization.

Prints the scaled ground energy beside the cluster (W) and condensate
predictions along a clean hopping sweep. The phase boundaries implied by
comparing the closed forms follow.
"""

import numpy as np

from bosehub.eigen import ground_state
from bosehub.fock import enumerate_basis
from bosehub.hamil import ModelParams, build_hamiltonian
from bosehub.pert import (alpha, boundary_loc_w, boundary_sf_loc, boundary_w_sf, sf_coefficients,
                          sf_energy_avg, w_energy)

L, N = 8, 4
basis = enumerate_basis(L, N)
a, b = sf_coefficients(L, N)
print(f"superfluid energy coefficients: a = {a:.4f}, b = {b:.4f}; alpha({N}) = {alpha(N):.4f}\n")
print("   tau     exact        W   superfluid")
for tau in np.geomspace(0.02, 3, 10):
    H = build_hamiltonian(ModelParams(L=L, N=N, U=1.0, J=tau * (N - 1)), basis)
    eps = ground_state(H).energy / (N * (N - 1))
    print(f"{tau:6.3f} {eps:9.5f} {w_energy(tau).epsilon:9.5f} {sf_energy_avg(tau, 0.0, L, N).epsilon:12.5f}")

print("\n  delta   loc|W tau   W|SF tau   SF|loc tau")
for delta in (1e-4, 1e-3, 1e-2):
    tw = (delta / 2) ** (1 / N) / alpha(N)
    print(f"{delta:7.0e} {tw:10.4f} {boundary_w_sf(delta, L, N):10.4f} {boundary_sf_loc(delta, L, N):12.4f}"
          f"   (check: delta at loc|W = {boundary_loc_w(tw, N):.1e})")
