"""Command-line front end.

    bosehub ground-state  --L 8 --N 4 --tau 0.15 --delta 3.3e-4
    bosehub phase-diagram --config configs/phase_diagram.toml --workers 4
    bosehub critical-tau  --config configs/critical_tau.toml
    bosehub compare-pt    --tau-grid 0.05:2:10:log --delta-grid 1e-3:1e-1:3:log

Settings come from an optional TOML file and are overridden by flags.
Each run writes into a fresh directory ``<out>/<timestamp>-<hash>``.
Exit status is 0 on success, 2 for configuration errors and 3 for
computation errors.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib as tomli
except ImportError:  # Python < 3.11
    import tomli

from . import __version__
from .analysis import (ipr_from_occupations, occupation_density, occupation_density_reciprocal,
                       occupations, reciprocal_occupations)
from .eigen import ground_state
from .ensemble import EnsembleSpec, critical_tau_sweep, hamiltonian_for, phase_diagram
from .errors import BosehubError, ConfigError
from .hamil import ModelParams, sample_disorder
from .pert import (alpha, boundary_loc_w, boundary_sf_loc, boundary_w_sf, localized_energy_avg,
                   sf_energy_avg, w_energy)
from .records import write_csv, write_kv, write_state

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3
SUBCOMMANDS = ("ground-state", "phase-diagram", "critical-tau", "compare-pt")

DEFAULTS = {
    "subcommand": None,
    "model": {"L": 8, "N": 4, "boundary": "open", "N_list": None},
    "params": {"tau": 0.15, "delta": 3.3e-4,
               "tau_grid": "0.05:2:40:log", "delta_grid": "1e-4:1:40:log"},
    "ensemble": {"realizations": 100, "seed": 0, "workers": None},
    "output": {"directory": "runs", "formats": ["csv"], "dump_state": False},
}


def parse_grid(text) -> tuple:
    """``lo:hi:n[:log|lin]`` (log by default) or an explicit list of numbers."""
    if isinstance(text, (list, tuple)):
        vals = [float(x) for x in text]
    else:
        parts = str(text).split(":")
        if len(parts) not in (3, 4):
            raise ConfigError(f"grid {text!r}: expected lo:hi:n[:log|lin]")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"grid {text!r}: {exc}") from None
        kind = parts[3] if len(parts) == 4 else "log"
        if n < 1 or hi < lo:
            raise ConfigError(f"grid {text!r}: need n >= 1 and hi >= lo")
        if kind == "log":
            if lo <= 0:
                raise ConfigError(f"grid {text!r}: log spacing needs lo > 0")
            vals = np.geomspace(lo, hi, n)
        elif kind == "lin":
            vals = np.linspace(lo, hi, n)
        else:
            raise ConfigError(f"grid {text!r}: spacing must be 'log' or 'lin'")
    return tuple(float(v) for v in vals)


def _merge(base: dict, new: dict, where: str = "") -> dict:
    for k, v in new.items():
        path = f"{where}{k}"
        if k not in base:
            raise ConfigError(f"unknown config key '{path}'")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"config key '{path}' must be a table")
            _merge(base[k], v, path + ".")
        else:
            base[k] = v
    return base


def load_config(path) -> dict:
    """Read a TOML file on top of the defaults; unknown keys are rejected."""
    try:
        raw = tomli.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return _merge(copy.deepcopy(DEFAULTS), raw)


def _check(cfg: dict) -> dict:
    m, p, e, o = cfg["model"], cfg["params"], cfg["ensemble"], cfg["output"]
    if cfg["subcommand"] not in SUBCOMMANDS:
        raise ConfigError(f"subcommand must be one of {SUBCOMMANDS}")

    def integer(block, key, lo):
        v = block[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < lo:
            raise ConfigError(f"'{key}' must be an integer >= {lo}, got {v!r}")

    integer(m, "L", 1)
    integer(m, "N", 2)
    if m["boundary"] not in ("open", "periodic"):
        raise ConfigError(f"'model.boundary' must be 'open' or 'periodic', got {m['boundary']!r}")
    if m["N_list"] is not None:
        if not isinstance(m["N_list"], list) or not all(isinstance(n, int) and n >= 2 for n in m["N_list"]):
            raise ConfigError("'model.N_list' must be a list of integers >= 2")
    for key in ("tau", "delta"):
        if not isinstance(p[key], (int, float)) or p[key] < 0:
            raise ConfigError(f"'params.{key}' must be a non-negative number")
    p["tau_grid"] = list(parse_grid(p["tau_grid"]))
    p["delta_grid"] = list(parse_grid(p["delta_grid"]))
    integer(e, "realizations", 1)
    integer(e, "seed", 0)
    if e["workers"] is not None:
        integer(e, "workers", 1)
    if not isinstance(o["formats"], list) or set(o["formats"]) - {"csv"}:
        raise ConfigError("'output.formats' supports only ['csv']")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bosehub", description="Disordered attractive Bose-Hubbard chain.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path)
        sp.add_argument("--L", type=int)
        sp.add_argument("--N", type=int)
        sp.add_argument("--N-list", dest="N_list", type=lambda s: [int(x) for x in s.split(",")])
        sp.add_argument("--boundary", choices=("open", "periodic"))
        sp.add_argument("--tau", type=float)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--tau-grid", dest="tau_grid")
        sp.add_argument("--delta-grid", dest="delta_grid")
        sp.add_argument("--realizations", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--dump-state", dest="dump_state", action="store_true", default=None)
        sp.add_argument("--resume", type=Path, help="continue a previous run directory")
    return ap


def resolve(args) -> dict:
    cfg = load_config(args.config) if args.config else copy.deepcopy(DEFAULTS)
    if args.config and cfg["subcommand"] not in (None, args.subcommand):
        raise ConfigError(f"config is for '{cfg['subcommand']}', not '{args.subcommand}'")
    cfg["subcommand"] = args.subcommand
    routes = {"L": ("model", "L"), "N": ("model", "N"), "N_list": ("model", "N_list"),
              "boundary": ("model", "boundary"), "tau": ("params", "tau"), "delta": ("params", "delta"),
              "tau_grid": ("params", "tau_grid"), "delta_grid": ("params", "delta_grid"),
              "realizations": ("ensemble", "realizations"), "seed": ("ensemble", "seed"),
              "workers": ("ensemble", "workers"), "dump_state": ("output", "dump_state")}
    for attr, (block, key) in routes.items():
        v = getattr(args, attr)
        if v is not None:
            cfg[block][key] = v
    if args.out is not None:
        cfg["output"]["directory"] = str(args.out)
    if cfg["ensemble"]["workers"] is None:
        env = os.environ.get("BOSEHUB_WORKERS")
        try:
            cfg["ensemble"]["workers"] = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"BOSEHUB_WORKERS must be an integer, got {env!r}") from None
    return _check(cfg)


def config_hash(cfg: dict) -> str:
    relevant = {k: v for k, v in cfg.items() if k != "output"}
    relevant["ensemble"] = {k: v for k, v in cfg["ensemble"].items() if k != "workers"}
    return hashlib.sha256(json.dumps(relevant, sort_keys=True).encode()).hexdigest()[:12]


def run_directory(cfg: dict, resume=None) -> Path:
    if resume is not None:
        if not resume.is_dir():
            raise ConfigError(f"resume directory {resume} does not exist")
        return resume
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    base = Path(cfg["output"]["directory"]) / f"{stamp}-{config_hash(cfg)}"
    out, i = base, 1
    while out.exists():
        out = base.with_name(f"{base.name}-{i}")
        i += 1
    out.mkdir(parents=True)
    return out


def _metadata(cfg, out: Path, extra=None):
    meta = {
        "code_version": __version__,
        "subcommand": cfg["subcommand"],
        "config_hash": config_hash(cfg),
        "master_seed": cfg["ensemble"]["seed"],
        "created": datetime.now(timezone.utc).isoformat(),
        "config": json.dumps(cfg, sort_keys=True),
    }
    meta.update(extra or {})
    write_kv(out / "metadata.txt", meta)


def cmd_ground_state(cfg: dict, out: Path) -> list:
    m, p = cfg["model"], cfg["params"]
    L, N = m["L"], m["N"]
    omega = sample_disorder(L, p["delta"] * (N - 1), (cfg["ensemble"]["seed"], 0, 0))
    params = ModelParams(L=L, N=N, U=1.0, J=p["tau"] * (N - 1), boundary=m["boundary"], omega=omega)
    basis, H = hamiltonian_for(params)
    gs = ground_state(H, seed=cfg["ensemble"]["seed"])
    occ_s = occupations(gs.vector, basis)
    occ_r = reciprocal_occupations(gs.vector, basis, m["boundary"])
    record = {
        "L": L, "N": N, "boundary": m["boundary"], "tau": float(p["tau"]), "delta": float(p["delta"]),
        "energy": gs.energy, "energy_scaled": gs.energy / (N * (N - 1)),
        "ipr_s": ipr_from_occupations(occ_s, N), "ipr_r": ipr_from_occupations(occ_r, N),
        "residual": gs.residual, "restarts": gs.iterations,
        "occupations_s": occ_s, "occupations_r": occ_r, "omega": omega,
    }
    write_kv(out / "observables.txt", record)
    p_site = np.column_stack([occupation_density(gs.vector, basis, l) for l in range(L)])
    p_mode = np.column_stack([occupation_density_reciprocal(gs.vector, basis, k, m["boundary"])
                              for k in range(1, L + 1)])
    n = np.arange(N + 1, dtype=float)
    write_csv(out / "occupation_site.csv", ["n"] + [f"site_{l + 1}" for l in range(L)],
              np.column_stack([n, p_site]).tolist())
    write_csv(out / "occupation_mode.csv", ["n"] + [f"mode_{k}" for k in range(1, L + 1)],
              np.column_stack([n, p_mode]).tolist())
    files = ["observables.txt", "occupation_site.csv", "occupation_mode.csv"]
    if cfg["output"]["dump_state"]:
        write_state(out / "state.bin", gs.vector, L, N)
        files.append("state.bin")
    return files


def _spec(cfg, observables, N=None):
    m, p, e = cfg["model"], cfg["params"], cfg["ensemble"]
    return EnsembleSpec(m["L"], N or m["N"], m["boundary"], tuple(p["tau_grid"]), tuple(p["delta_grid"]),
                        e["realizations"], e["seed"], observables)


def _progress(done, total):
    print(f"\r{done}/{total} cells", end="" if done < total else "\n", file=sys.stderr, flush=True)


def _write_grid(path, grid):
    write_csv(path, grid.header(), grid.rows())


def _boundary_curves(out: Path, L: int, N: int, boundary: str, tau_grid, delta_grid, suffix=""):
    taus = np.asarray(tau_grid)
    write_csv(out / f"boundary_loc_w{suffix}.csv", ["tau", "delta"],
              [[t, boundary_loc_w(t, N)] for t in taus])
    for name, fn in (("boundary_w_sf", boundary_w_sf), ("boundary_sf_loc", boundary_sf_loc)):
        rows = []
        for d in delta_grid:
            try:
                rows.append([fn(d, L, N, boundary), d])
            except BosehubError:
                rows.append([None, d])
        write_csv(out / f"{name}{suffix}.csv", ["tau", "delta"], rows)
    return [f"{n}{suffix}.csv" for n in ("boundary_loc_w", "boundary_w_sf", "boundary_sf_loc")]


def cmd_phase_diagram(cfg: dict, out: Path) -> list:
    spec = _spec(cfg, ("ipr_s", "ipr_r", "energy"))
    grid = phase_diagram(spec, workers=cfg["ensemble"]["workers"],
                         checkpoint=out / "checkpoint.ndjson", progress=_progress)
    _write_grid(out / "phase_grid.csv", grid)
    files = ["phase_grid.csv", "checkpoint.ndjson"]
    files += _boundary_curves(out, spec.L, spec.N, spec.boundary, spec.tau_grid, spec.delta_grid)
    cfg["_grid_meta"] = grid.metadata
    return files


def cmd_critical_tau(cfg: dict, out: Path) -> list:
    spec = _spec(cfg, ("ipr_s", "ipr_r", "energy", "tau_c"))
    N_list = cfg["model"]["N_list"] or [spec.N]
    rows, grids = critical_tau_sweep(spec, N_list, workers=cfg["ensemble"]["workers"],
                                     checkpoint=out / "checkpoint.ndjson")
    write_csv(out / "critical_tau.csv", ["N", "delta", "tau_c_s", "tau_c_r"],
              [[float(N), d, ts, tr] for N, d, ts, tr in rows])
    files = ["critical_tau.csv", "checkpoint.ndjson"]
    for N, grid in grids.items():
        _write_grid(out / f"phase_grid_N{N}.csv", grid)
        files.append(f"phase_grid_N{N}.csv")
        files += _boundary_curves(out, spec.L, N, spec.boundary, spec.tau_grid, spec.delta_grid, f"_N{N}")
    cfg["_grid_meta"] = {f"alpha_N{N}": alpha(N) for N in N_list}
    return files


def cmd_compare_pt(cfg: dict, out: Path) -> list:
    spec = _spec(cfg, ("energy", "fidelities"))
    grid = phase_diagram(spec, workers=cfg["ensemble"]["workers"],
                         checkpoint=out / "checkpoint.ndjson", progress=_progress)
    header = ["tau", "delta"]
    phases = ("localized", "w", "superfluid")
    for ph in phases:
        header += [f"fidelity_{ph}", f"fidelity_{ph}_se"]
    header += ["energy_exact", "energy_exact_se"] + [f"abs_err_{ph}" for ph in phases]
    rows = []
    for _, i_t, i_d, t, d in spec.cells():
        row = [t, d]
        for ph in phases:
            s = grid.se[f"fidelity_{ph}"][i_d, i_t]
            row += [grid.mean[f"fidelity_{ph}"][i_d, i_t], None if np.isnan(s) else s]
        e = grid.mean["energy"][i_d, i_t]
        s = grid.se["energy"][i_d, i_t]
        analytic = [localized_energy_avg(t, d, spec.L, 1, spec.boundary).epsilon, w_energy(t).epsilon]
        try:
            analytic.append(sf_energy_avg(t, d, spec.L, spec.N, spec.boundary).epsilon if t > 0 else None)
        except BosehubError:
            analytic.append(None)
        row += [e, None if np.isnan(s) else s] + [None if a is None else abs(e - a) for a in analytic]
        rows.append(row)
    write_csv(out / "compare_pt.csv", header, rows)
    return ["compare_pt.csv", "checkpoint.ndjson"]


COMMANDS = {"ground-state": cmd_ground_state, "phase-diagram": cmd_phase_diagram,
            "critical-tau": cmd_critical_tau, "compare-pt": cmd_compare_pt}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve(args)
        out = run_directory(cfg, args.resume)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        files = COMMANDS[cfg["subcommand"]](cfg, out)
    except (BosehubError, ArithmeticError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    extra = {f"grid_{k}": v for k, v in cfg.pop("_grid_meta", {}).items()}
    extra["wall_time_s"] = time.perf_counter() - start
    extra["files"] = " ".join(files)
    _metadata(cfg, out, extra)
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
