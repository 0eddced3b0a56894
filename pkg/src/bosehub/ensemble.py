"""Disorder-averaged observables over (tau, delta) grids.

Every realization draws its detunings from a generator keyed by
``(master_seed, cell_index, realization)``, so a cell's result does not
depend on which process computed it or in which order. Cells run in a
process pool; each cell reduces its realizations in index order, which
keeps the output bit-identical for any worker count.

Scans use ``U = 1`` so that ``J = tau (N-1)`` and ``D = delta (N-1)``.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import __version__
from .analysis import critical_tau, ipr_from_occupations, occupations, overlap, reciprocal_occupations
from .eigen import ground_state
from .errors import CellError, ConvergenceError, DegeneracyError, DomainError, SingularityError
from .fock import enumerate_basis
from .hamil import BOUNDARIES, ModelParams, build_hamiltonian, sample_disorder
from .pert import localized_state, sf_state, w_state

__all__ = [
    "FIDELITY_PHASES",
    "OBSERVABLES",
    "CellResult",
    "EnsembleSpec",
    "PhaseGrid",
    "critical_tau_sweep",
    "hamiltonian_for",
    "load_checkpoint",
    "log_grid",
    "phase_diagram",
    "run_cell",
]

OBSERVABLES = ("ipr_s", "ipr_r", "energy", "fidelities", "tau_c")
FIDELITY_PHASES = ("localized", "w", "superfluid")


def log_grid(lo: float, hi: float, n: int) -> tuple:
    """``n`` log-spaced points from `lo` to `hi` inclusive."""
    return tuple(float(x) for x in np.geomspace(lo, hi, n))


@dataclass(frozen=True)
class EnsembleSpec:
    """What to average, where, and with which seed."""

    L: int
    N: int
    boundary: str = "open"
    tau_grid: tuple = field(default_factory=lambda: log_grid(0.05, 2.0, 40))
    delta_grid: tuple = field(default_factory=lambda: log_grid(1e-4, 1.0, 40))
    realizations: int = 100
    master_seed: int = 0
    observables: tuple = ("ipr_s", "ipr_r", "energy")

    def __post_init__(self):
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        object.__setattr__(self, "delta_grid", tuple(float(d) for d in self.delta_grid))
        object.__setattr__(self, "observables", tuple(self.observables))
        if self.L < 1 or self.N < 2:
            raise DomainError("ensembles need L >= 1 and N >= 2")
        if self.boundary not in BOUNDARIES:
            raise DomainError(f"unknown boundary {self.boundary!r}")
        if self.realizations < 1:
            raise DomainError("realizations must be >= 1")
        for name, grid in (("tau_grid", self.tau_grid), ("delta_grid", self.delta_grid)):
            if not grid:
                raise DomainError(f"{name} is empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise DomainError(f"{name} must be strictly ascending")
            if grid[0] < 0:
                raise DomainError(f"{name} must be non-negative")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must fit in 64 unsigned bits")
        bad = set(self.observables) - set(OBSERVABLES)
        if bad:
            raise DomainError(f"unknown observables {sorted(bad)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tau_grid"] = list(self.tau_grid)
        d["delta_grid"] = list(self.delta_grid)
        d["observables"] = list(self.observables)
        return d

    @property
    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def n_cells(self) -> int:
        return len(self.tau_grid) * len(self.delta_grid)

    def cell_index(self, i_tau: int, i_delta: int) -> int:
        return i_delta * len(self.tau_grid) + i_tau

    def cells(self):
        """``(cell_index, i_tau, i_delta, tau, delta)`` in index order."""
        for i_d, d in enumerate(self.delta_grid):
            for i_t, t in enumerate(self.tau_grid):
                yield self.cell_index(i_t, i_d), i_t, i_d, t, d

    def quantities(self) -> tuple:
        """Names of the per-realization scalars this spec records."""
        q = []
        if "ipr_s" in self.observables or "tau_c" in self.observables:
            q.append("ipr_s")
        if "ipr_r" in self.observables or "tau_c" in self.observables:
            q.append("ipr_r")
        if "energy" in self.observables:
            q.append("energy")
        if "fidelities" in self.observables:
            q += [f"fidelity_{p}" for p in FIDELITY_PHASES]
        return tuple(q)


@dataclass
class CellResult:
    """Mean and standard error of each quantity over one cell's realizations.

    ``se`` entries are ``None`` when fewer than two realizations survived.
    """

    cell: int
    i_tau: int
    i_delta: int
    tau: float
    delta: float
    n: int
    skipped: int
    mean: dict
    se: dict
    seed: int
    spec_hash: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, allow_nan=True)

    @classmethod
    def from_json(cls, line: str) -> "CellResult":
        return cls(**json.loads(line))


@lru_cache(maxsize=8)
def _structure(L: int, N: int, boundary: str):
    """Basis, hopping matrix at ``J = 1`` and the on-site number table."""
    basis = enumerate_basis(L, N)
    hop = build_hamiltonian(ModelParams(L=L, N=N, U=0.0, J=1.0, boundary=boundary), basis)
    n = basis.states.astype(float)
    return basis, hop, n, -0.5 * (n * (n - 1.0)).sum(axis=1)


def hamiltonian_for(params: ModelParams):
    """Same matrix as :func:`bosehub.hamil.build_hamiltonian`, reusing the
    cached hopping structure of ``(L, N, boundary)``."""
    basis, hop, n, inter = _structure(params.L, params.N, params.boundary)
    diag = n @ params.omega + params.U * inter
    return basis, params.J * hop + sp.diags(diag, format="csr")


def _realization(spec: EnsembleSpec, tau: float, delta: float, cell: int, r: int, names) -> dict:
    N = spec.N
    omega = sample_disorder(spec.L, delta * (N - 1), (spec.master_seed, cell, r))
    params = ModelParams(L=spec.L, N=N, U=1.0, J=tau * (N - 1), boundary=spec.boundary, omega=omega)
    basis, H = hamiltonian_for(params)
    gs = ground_state(H, seed=r)
    psi = gs.vector
    out = {}
    if "ipr_s" in names:
        out["ipr_s"] = ipr_from_occupations(occupations(psi, basis), N)
    if "ipr_r" in names:
        out["ipr_r"] = ipr_from_occupations(reciprocal_occupations(psi, basis, spec.boundary), N)
    if "energy" in names:
        out["energy"] = gs.energy / (N * (N - 1))
    if "fidelity_localized" in names:
        # resonant denominators propagate as SingularityError and skip the draw
        out["fidelity_localized"] = overlap(psi, localized_state(params))
        out["fidelity_w"] = overlap(psi, w_state(params).vector)
        try:
            out["fidelity_superfluid"] = overlap(psi, sf_state(params)) if tau > 0 else np.nan
        except DegeneracyError:
            out["fidelity_superfluid"] = np.nan
    return out


def run_cell(spec: EnsembleSpec, tau: float, delta: float, cell: int | None = None) -> CellResult:
    """Average the spec's observables over its realizations at one point.

    `cell` selects the disorder stream; by default it is looked up from the
    grids (0 when the point is off-grid).

    Raises
    ------
    CellError
        If a ground-state solve fails to converge; the cause is chained.
    """
    i_t = spec.tau_grid.index(tau) if tau in spec.tau_grid else -1
    i_d = spec.delta_grid.index(delta) if delta in spec.delta_grid else -1
    if cell is None:
        cell = spec.cell_index(i_t, i_d) if i_t >= 0 and i_d >= 0 else 0
    if tau < 0 or delta < 0:
        raise DomainError("tau and delta must be non-negative")
    names = spec.quantities()
    samples = {k: [] for k in names}
    skipped = 0
    for r in range(spec.realizations):
        try:
            vals = _realization(spec, tau, delta, cell, r, names)
        except SingularityError:
            skipped += 1
            continue
        except ConvergenceError as exc:
            raise CellError(f"cell {cell} (tau={tau!r}, delta={delta!r}), realization {r}: {exc}",
                            tau=tau, delta=delta, cell=cell, realization=r) from exc
        for k in names:
            samples[k].append(vals[k])
    n = spec.realizations - skipped
    mean, se = {}, {}
    for k in names:
        a = np.asarray(samples[k], dtype=float)
        mean[k] = float(np.mean(a)) if n else float("nan")
        se[k] = float(np.std(a, ddof=1) / np.sqrt(n)) if n > 1 else None
    return CellResult(cell, i_t, i_d, float(tau), float(delta), n, skipped, mean, se,
                      spec.master_seed, spec.spec_hash)


@dataclass
class PhaseGrid:
    """Cell averages laid out as ``(len(delta_grid), len(tau_grid))`` arrays."""

    spec: EnsembleSpec
    mean: dict
    se: dict
    n: np.ndarray
    skipped: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def tau(self) -> np.ndarray:
        return np.asarray(self.spec.tau_grid)

    @property
    def delta(self) -> np.ndarray:
        return np.asarray(self.spec.delta_grid)

    @classmethod
    def from_cells(cls, spec: EnsembleSpec, cells, metadata=None) -> "PhaseGrid":
        shape = (len(spec.delta_grid), len(spec.tau_grid))
        names = spec.quantities()
        mean = {k: np.full(shape, np.nan) for k in names}
        se = {k: np.full(shape, np.nan) for k in names}
        n = np.zeros(shape, dtype=int)
        skipped = np.zeros(shape, dtype=int)
        seen = set()
        for c in cells:
            i_d, i_t = divmod(c.cell, len(spec.tau_grid))
            seen.add(c.cell)
            for k in names:
                mean[k][i_d, i_t] = c.mean[k]
                se[k][i_d, i_t] = np.nan if c.se[k] is None else c.se[k]
            n[i_d, i_t] = c.n
            skipped[i_d, i_t] = c.skipped
        missing = spec.n_cells - len(seen)
        if missing:
            raise DomainError(f"{missing} cells missing from the grid")
        return cls(spec, mean, se, n, skipped, dict(metadata or {}))

    def rows(self):
        """``(tau, delta, mean/se pairs...)`` per cell in cell-index order."""
        names = self.spec.quantities()
        for _, i_t, i_d, t, d in self.spec.cells():
            row = [t, d]
            for k in names:
                s = self.se[k][i_d, i_t]
                row += [self.mean[k][i_d, i_t], None if np.isnan(s) else s]
            row += [int(self.n[i_d, i_t]), int(self.skipped[i_d, i_t])]
            yield row

    def header(self):
        h = ["tau", "delta"]
        for k in self.spec.quantities():
            h += [k, f"{k}_se"]
        return h + ["n", "skipped"]


def load_checkpoint(path, spec: EnsembleSpec) -> dict:
    """Completed cells of `spec` found in an NDJSON checkpoint, by cell index.

    Records from other specs and a torn final line are ignored.
    """
    done = {}
    if not path or not os.path.exists(path):
        return done
    with open(path) as fh:
        for line in fh:
            try:
                c = CellResult.from_json(line)
            except (json.JSONDecodeError, TypeError):
                continue
            if c.spec_hash == spec.spec_hash:
                done[c.cell] = c
    return done


def _open_sink(path):
    # drop a torn tail so the next record starts on its own line
    if os.path.exists(path):
        with open(path, "rb+") as fh:
            data = fh.read()
            if data and not data.endswith(b"\n"):
                fh.truncate(data.rfind(b"\n") + 1)
    return open(path, "a")


def _cell_task(spec, cell, tau, delta):
    return run_cell(spec, tau, delta, cell=cell)


def _default_workers() -> int:
    env = os.environ.get("BOSEHUB_WORKERS")
    return max(1, int(env)) if env else 1


def phase_diagram(spec: EnsembleSpec, workers: int | None = None, checkpoint=None,
                  progress=None) -> PhaseGrid:
    """Run every cell of `spec`.

    Parameters
    ----------
    workers : int, optional
        Process count (default ``$BOSEHUB_WORKERS`` or 1). The result does
        not depend on it.
    checkpoint : path, optional
        NDJSON file; finished cells are appended as they complete and cells
        already present for the same spec are not recomputed.
    progress : callable, optional
        Called as ``progress(done, total)`` after each cell.
    """
    workers = _default_workers() if workers is None else max(1, int(workers))
    start = time.perf_counter()
    done = load_checkpoint(checkpoint, spec)
    todo = [(c, t, d) for c, _, _, t, d in spec.cells() if c not in done]
    sink = _open_sink(checkpoint) if checkpoint else None

    def record(res):
        done[res.cell] = res
        if sink:
            sink.write(res.to_json() + "\n")
            sink.flush()
        if progress:
            progress(len(done), spec.n_cells)

    try:
        if workers == 1 or len(todo) <= 1:
            for c, t, d in todo:
                record(run_cell(spec, t, d, cell=c))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [pool.submit(_cell_task, spec, c, t, d) for c, t, d in todo]
                for f in as_completed(futs):
                    record(f.result())
    finally:
        if sink:
            sink.close()
    meta = {
        "spec_hash": spec.spec_hash,
        "master_seed": spec.master_seed,
        "code_version": __version__,
        "wall_time_s": time.perf_counter() - start,
        "cells_resumed": spec.n_cells - len(todo),
        "spec": json.dumps(spec.to_dict(), sort_keys=True),
    }
    return PhaseGrid.from_cells(spec, [done[c] for c in sorted(done)], meta)


def critical_tau_sweep(spec: EnsembleSpec, N_list=None, workers: int | None = None,
                       checkpoint=None):
    """Critical hoppings of both IPRs along each delta row.

    Returns ``(rows, grids)``: rows ``(N, delta, tau_c_s, tau_c_r)`` and the
    underlying :class:`PhaseGrid` per ``N``.
    """
    if len(spec.tau_grid) < 5:
        raise DomainError("critical_tau_sweep needs at least 5 tau points")
    rows, grids = [], {}
    for N in (N_list or [spec.N]):
        sub = EnsembleSpec(spec.L, N, spec.boundary, spec.tau_grid, spec.delta_grid,
                           spec.realizations, spec.master_seed,
                           tuple(sorted(set(spec.observables) | {"tau_c"})))
        grid = phase_diagram(sub, workers=workers, checkpoint=checkpoint)
        grids[N] = grid
        for i_d, d in enumerate(sub.delta_grid):
            rows.append((N, d, critical_tau(grid.tau, grid.mean["ipr_s"][i_d]),
                         critical_tau(grid.tau, grid.mean["ipr_r"][i_d])))
    return rows, grids
