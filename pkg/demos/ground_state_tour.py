"""Three ground states of eight sites and four attracting bosons.

Weak hopping binds all bosons to the deepest site. Somewhat stronger hopping
lets the bound cluster tunnel as a whole, so it spreads coherently over the
chain, and strong hopping condenses every boson into the lowest standing
wave. The two inverse participation ratios tell these regimes apart.

    python demos/ground_state_tour.py
"""

import numpy as np

from bosehub.analysis import ipr, occupation_density, overlap
from bosehub.eigen import ground_state
from bosehub.fock import enumerate_basis
from bosehub.hamil import ModelParams, build_hamiltonian, sample_disorder
from bosehub.pert import localized_state, sf_state, w_state

L, N, delta = 8, 4, 3.3e-4
basis = enumerate_basis(L, N)
omega = sample_disorder(L, delta * (N - 1), seed=1)

for tau, label, guess in ((0.05, "localized", localized_state),
                          (0.15, "W", lambda p: w_state(p).vector),
                          (1.0, "superfluid", sf_state)):
    p = ModelParams(L=L, N=N, U=1.0, J=tau * (N - 1), omega=omega)
    psi = ground_state(build_hamiltonian(p, basis)).vector
    full = [occupation_density(psi, basis, l)[N] for l in range(L)]
    print(f"tau = {tau:<5} ({label})")
    print(f"  P_s = {ipr(psi, basis):.3f}   P_r = {ipr(psi, basis, 'reciprocal'):.3f}")
    print("  prob. all bosons on site l:", np.array2string(np.array(full), precision=3))
    print(f"  overlap^2 with the perturbative {label} state: {overlap(psi, guess(p)):.4f}")
