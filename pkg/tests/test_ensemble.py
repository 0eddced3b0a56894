import json

import numpy as np
import pytest

from bosehub.ensemble import (CellResult, EnsembleSpec, PhaseGrid, critical_tau_sweep, hamiltonian_for,
                              load_checkpoint, log_grid, phase_diagram, run_cell)
from bosehub.errors import CellError, DomainError
from bosehub.fock import enumerate_basis
from bosehub.hamil import ModelParams, build_hamiltonian
from bosehub.records import read_csv, write_csv


def small_spec(**kw):
    base = dict(L=5, N=3, tau_grid=(0.1, 0.5), delta_grid=(0.01, 0.1), realizations=6, master_seed=7)
    base.update(kw)
    return EnsembleSpec(**base)


def test_spec_validation():
    with pytest.raises(DomainError):
        small_spec(realizations=0)
    with pytest.raises(DomainError):
        small_spec(tau_grid=())
    with pytest.raises(DomainError):
        small_spec(tau_grid=(0.5, 0.1))
    with pytest.raises(DomainError):
        small_spec(tau_grid=(-0.1, 0.1))
    with pytest.raises(DomainError):
        small_spec(observables=("bogus",))
    s = small_spec()
    assert s.n_cells == 4 and len(s.spec_hash) == 16
    assert s.spec_hash == small_spec().spec_hash != small_spec(master_seed=8).spec_hash
    assert len(log_grid(0.05, 2, 40)) == 40


def test_cached_hamiltonian_matches_builder():
    p = ModelParams(L=6, N=3, U=1.0, J=0.4, omega=np.linspace(-0.2, 0.1, 6), boundary="periodic")
    basis, H = hamiltonian_for(p)
    assert abs(H - build_hamiltonian(p, enumerate_basis(6, 3))).max() == 0


def test_zero_disorder_has_zero_variance():
    c = run_cell(small_spec(), 0.5, 0.0)
    assert all(v == pytest.approx(0, abs=1e-12) for v in c.se.values())


def test_single_realization_has_no_error_bar():
    c = run_cell(small_spec(realizations=1), 0.5, 0.01)
    assert all(v is None for v in c.se.values()) and c.n == 1


def test_cell_seeds_are_independent_and_reproducible():
    s = small_spec()
    a = run_cell(s, 0.1, 0.1, cell=0)
    assert a.to_json() == run_cell(s, 0.1, 0.1, cell=0).to_json()
    assert a.mean != run_cell(s, 0.1, 0.1, cell=1).mean


def test_phase_diagram_deterministic_across_workers(tmp_path):
    s = small_spec()
    g1 = phase_diagram(s, workers=1)
    g2 = phase_diagram(s, workers=2)
    for k in s.quantities():
        assert np.array_equal(g1.mean[k], g2.mean[k])
        assert np.array_equal(g1.se[k], g2.se[k], equal_nan=True)
    assert (g1.se["ipr_s"] >= 0).all()
    write_csv(tmp_path / "g.csv", g1.header(), g1.rows())
    header, data = read_csv(tmp_path / "g.csv")
    assert header == g1.header() and data.shape == (4, len(header))
    assert data[:, 2].tolist() == [g1.mean["ipr_s"][i_d, i_t] for _, i_t, i_d, _, _ in s.cells()]


def test_checkpoint_resume(tmp_path):
    s = small_spec()
    ck = tmp_path / "ck.ndjson"
    full = phase_diagram(s, checkpoint=ck)
    lines = ck.read_text().splitlines()
    assert len(lines) == 4 and all(json.loads(l)["spec_hash"] == s.spec_hash for l in lines)
    # keep two cells plus a torn line, then resume
    ck.write_text("\n".join(lines[:2]) + "\n" + lines[2][:17])
    calls = []
    resumed = phase_diagram(s, checkpoint=ck, progress=lambda d, t: calls.append(d))
    assert resumed.metadata["cells_resumed"] == 2 and calls == [3, 4]
    for k in s.quantities():
        assert np.array_equal(full.mean[k], resumed.mean[k])
    assert len(load_checkpoint(ck, s)) == 4
    assert load_checkpoint(ck, small_spec(master_seed=99)) == {}


def test_cell_record_roundtrip():
    c = run_cell(small_spec(realizations=3), 0.1, 0.01)
    back = CellResult.from_json(c.to_json())
    assert back == c


def test_fidelities_and_counts():
    s = small_spec(L=8, N=4, tau_grid=(0.05,), delta_grid=(3.3e-4,), realizations=3,
                   observables=("ipr_s", "ipr_r", "energy", "fidelities"))
    c = run_cell(s, 0.05, 3.3e-4)
    assert c.skipped == 0
    for ph in ("localized", "w", "superfluid"):
        assert 0 <= c.mean[f"fidelity_{ph}"] <= 1


def test_convergence_failure_aborts_cell(monkeypatch):
    from bosehub import ensemble
    from bosehub.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("stuck", best_residual=1.0, iterations=200)

    monkeypatch.setattr(ensemble, "ground_state", boom)
    with pytest.raises(CellError) as info:
        run_cell(small_spec(), 0.5, 0.1)
    assert info.value.tau == 0.5 and info.value.realization == 0


def test_singular_realizations_are_skipped(monkeypatch):
    from bosehub import ensemble
    from bosehub.errors import SingularityError
    real = ensemble._realization

    def flaky(spec, tau, delta, cell, r, names):
        if r == 2:
            raise SingularityError("resonant")
        return real(spec, tau, delta, cell, r, names)

    monkeypatch.setattr(ensemble, "_realization", flaky)
    c = run_cell(small_spec(), 0.5, 0.1)
    assert c.skipped == 1 and c.n == 5


def test_standard_error_scaling():
    s100 = EnsembleSpec(8, 4, tau_grid=(0.2,), delta_grid=(0.05,), realizations=100, master_seed=1)
    s400 = EnsembleSpec(8, 4, tau_grid=(0.2,), delta_grid=(0.05,), realizations=400, master_seed=1)
    se100 = run_cell(s100, 0.2, 0.05).se["ipr_s"]
    se400 = run_cell(s400, 0.2, 0.05).se["ipr_s"]
    assert abs(se100 / se400 / 2 - 1) < 0.3


def test_skip_rate_is_negligible():
    s = EnsembleSpec(6, 3, tau_grid=(0.05,), delta_grid=(1.0,), realizations=300,
                     observables=("ipr_s", "fidelities"))
    c = run_cell(s, 0.05, 1.0)
    assert c.skipped <= 0.001 * 300


def test_critical_tau_sweep_shape():
    s = EnsembleSpec(5, 3, tau_grid=log_grid(0.05, 1, 6), delta_grid=(1e-3, 1e-2), realizations=2)
    rows, grids = critical_tau_sweep(s, [2, 3])
    assert len(rows) == 4 and set(grids) == {2, 3}
    for N, d, ts, tr in rows:
        assert ts in s.tau_grid and tr in s.tau_grid
    with pytest.raises(DomainError):
        critical_tau_sweep(EnsembleSpec(5, 3, tau_grid=(0.1, 0.2), delta_grid=(0.1,), realizations=1))


def test_missing_cells_rejected():
    s = small_spec()
    with pytest.raises(DomainError):
        PhaseGrid.from_cells(s, [run_cell(s, 0.1, 0.01)])
