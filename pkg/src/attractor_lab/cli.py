"""Command-line entry point: ``run``, ``validate`` and ``sweep`` over scenario configs.

Every scenario renders all of its output files in memory and writes them
only after the computation finished, so failures leave nothing behind.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import dynamics as dyn
from . import prequantum as pq
from .config import (OUTPUT_ENV, ScenarioConfig, from_mapping, load_config, override,
                     parse_value, read_raw)
from .coupling import (build_delta_tensor, delta_kernel, hermiticity_probe,
                       parity_spectrum, tensor_to_dict)
from .errors import AttractorLabError, ConfigError
from .phasespace import (CoefficientMatrix, expand, gaussian_distribution, momentum_grid,
                         read_distribution_csv, to_doubled)
from .serialize import csv_text, emit_outputs, json_text, matrix_to_json, read_state_json
from .spectral import SpatialGrid, build_basis

MANIFEST = "manifest.json"


@dataclass
class Check:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.threshold)


@dataclass
class RunReport:
    scenario: str
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"scenario: {self.scenario}"]
        for k, v in self.summary.items():
            lines.append(f"  {k}: {v}")
        for c in self.checks:
            flag = "ok" if c.passed else "FAIL"
            lines.append(f"  [{flag}] {c.name} = {c.value:.3e} (limit {c.threshold:.1e})")
        lines.append(f"  wall time: {self.wall_time:.2f} s")
        for p in self.outputs:
            lines.append(f"  wrote {p}")
        return "\n".join(lines)


# -- building blocks ------------------------------------------------------


def _basis(cfg: ScenarioConfig):
    g = cfg.grid
    return build_basis(cfg.potential, SpatialGrid(g.x_min, g.x_max, g.n_points), cfg.d)


def _tensor(cfg: ScenarioConfig, basis):
    return build_delta_tensor(delta_kernel(cfg.potential), basis)


def initial_state(cfg: ScenarioConfig, basis, rng: np.random.Generator | None) -> np.ndarray:
    spec = dict(cfg.initial)
    kind = spec.pop("kind")
    d = cfg.d
    if kind == "random":
        return dyn.random_initial_state(d, rng, spread=float(spec.get("spread", 0.3)),
                                        min_gap=float(spec.get("min_gap", 0.0)))
    if kind == "diagonal":
        return np.diag(np.asarray(spec["values"], dtype=float)).astype(complex)
    if kind == "matrix":
        re = np.asarray(spec["re"], dtype=float)
        im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
        m = re + 1j * im
    elif kind == "file":
        path = spec["path"]
        if path.endswith(".csv"):
            m = expand(to_doubled(read_distribution_csv(path)), basis).normalized().matrix
        else:
            m = read_state_json(path).matrix
    else:  # gaussian
        pgrid = momentum_grid(basis.grid, float(spec.pop("p_max", 8.0)))
        f = gaussian_distribution(basis.grid, pgrid, **{k: float(v) for k, v in spec.items()})
        m = expand(to_doubled(f), basis).normalized().matrix
    if m.shape != (d, d):
        raise ConfigError(f"initial state has shape {m.shape}, expected ({d}, {d})")
    if abs(np.trace(m) - 1) > 1e-8:
        raise ConfigError("initial state must have unit trace")
    return m


def _snapshots(traj, stride: int) -> str:
    snaps = [{"t": float(traj.times[i]), "matrix": matrix_to_json(traj.matrices[i])}
             for i in range(0, len(traj.times), stride)]
    return json_text({"stride": stride, "snapshots": snaps})


def _trajectory_files(traj, stride: int) -> dict:
    files = {"trajectory.csv": csv_text(dyn.CSV_COLUMNS, traj.rows()),
             "snapshots.json": _snapshots(traj, stride)}
    if traj.stderr is not None:
        files["stderr.json"] = json_text({"times": traj.times,
                                          "stderr": [matrix_to_json(s) for s in traj.stderr]})
    return files


def _trace_check(traj) -> Check:
    return Check("trace_error", float(np.abs(traj.traces() - 1).max()), 1e-8)


# -- scenarios ------------------------------------------------------------


def run_basis(cfg, rng):
    b = _basis(cfg)
    rows = ((j, e) for j, e in enumerate(b.energies))
    files = {"energies.csv": csv_text(("index", "energy"), rows),
             "basis.json": json_text({"potential": cfg.potential.to_mapping(), "d": b.dim,
                                      "grid_hash": b.grid.digest(),
                                      "energies": b.energies,
                                      "metadata": {k: v for k, v in b.metadata.items()}})}
    checks = [Check("orthonormality_error", b.metadata["orthonormality_error"], 1e-8),
              Check("max_residual", float(np.max(b.metadata["residuals"])), 1e-6)]
    return files, checks, {"energies": np.round(b.energies, 6).tolist()}


def run_delta(cfg, rng):
    b = _basis(cfg)
    T = _tensor(cfg, b)
    meta = T.metadata
    probe = hermiticity_probe(T, 16, rng)
    files = {"delta.json": json_text(tensor_to_dict(T)),
             "delta_summary.json": json_text(meta | {"hermiticity_probe": probe})}
    checks = [Check("antisymmetry_residual", meta["antisymmetry_residual"], 1e-8),
              Check("trace_residual", meta["trace_residual"], 1e-8),
              Check("hermiticity_probe", probe, 1e-8)]
    return files, checks, {"raw_trace_residual": meta["raw_trace_residual"],
                           "max_entry": float(np.abs(T.entries).max())}


def run_parity(cfg, rng):
    b = _basis(cfg)
    T = _tensor(cfg, b)
    rep = parity_spectrum(b, T)
    files = {"parity_spectrum.csv": csv_text(("index", "eigenvalue"), enumerate(rep.eigenvalues)),
             "parity.json": json_text({"pairing_residual": rep.pairing_residual,
                                       "zero_mode_gap": rep.zero_mode_gap})}
    return files, [Check("pairing_residual", rep.pairing_residual, 1e-6)], \
        {"zero_mode_gap": rep.zero_mode_gap}


def _times(cfg):
    return np.linspace(0.0, cfg.dynamics.t_max, cfg.dynamics.n_steps + 1)


def run_conservative(cfg, rng):
    b = _basis(cfg)
    T = _tensor(cfg, b)
    f0 = initial_state(cfg, b, rng)
    traj = dyn.evolve_conservative(f0, T, _times(cfg), basis=b, frame=cfg.dynamics.frame)
    files = _trajectory_files(traj, cfg.dynamics.stride)
    checks = [_trace_check(traj), Check("hermiticity", traj.hermiticity_residual(), 1e-8)]
    drift = float(np.abs(traj.matrices - traj.matrices[0]).max())
    return files, checks, {"max_drift": drift}


def _dissipative(cfg, rng):
    b = _basis(cfg)
    T = _tensor(cfg, b)
    f0 = initial_state(cfg, b, rng)
    dc = cfg.dynamics
    noise = dyn.NoiseModel(dc.epsilon, dc.noise, dc.n_draws, cfg.seed, dc.path, dc.node_spacing)
    source = (dyn.ExponentialSource(f0, dc.tau) if dc.source == "exponential"
              else dyn.ConstantSource(dyn.attractor(f0, dc.tau, warn=False).g_inf))
    times = _times(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        traj = dyn.evolve_dissipative(f0, T, noise, times, source=source, rng=rng)
    notes = [str(w.message) for w in caught]
    return b, f0, source, traj, notes


def run_dissipative(cfg, rng):
    b, f0, source, traj, notes = _dissipative(cfg, rng)
    files = _trajectory_files(traj, cfg.dynamics.stride)
    summary = {"crossover_time": traj.metadata["crossover_time"],
               "dist_to_source_final": float(traj.diagnostics["dist_to_source"][-1])}
    if notes:
        summary["warnings"] = notes
    return files, [_trace_check(traj), Check("hermiticity", traj.hermiticity_residual(), 1e-8)], summary


def run_attractor(cfg, rng):
    b, f0, source, traj, notes = _dissipative(cfg, rng)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = dyn.attractor(f0, cfg.dynamics.tau)
    notes += [str(w.message) for w in caught]
    report = dyn.classify_state(res.g_inf, b)
    files = _trajectory_files(traj, cfg.dynamics.stride)
    files["limit_state.json"] = json_text({
        "basis_tag": b.tag, "matrix": matrix_to_json(res.g_inf),
        "top_eigenvalue": res.top, "position": res.position, "rate": res.rate,
        "degenerate": res.degenerate, "pure": report.pure, "stationary": report.stationary})
    dist = float(traj.diagnostics["dist_to_limit"][-1])
    checks = [_trace_check(traj),
              Check("idempotency", float(np.abs(res.g_inf @ res.g_inf - res.g_inf).max()), 1e-8),
              Check("dist_to_limit_final", dist, cfg.dynamics.limit_tol)]
    summary = {"dist_to_limit_final": dist, "predicted_rate": min(cfg.dynamics.epsilon, res.rate),
               "crossover_time": traj.metadata["crossover_time"]}
    if notes:
        summary["warnings"] = notes
    return files, checks, summary


def run_prequantum(cfg, rng):
    fl = cfg.flow
    sys_ = pq.FiniteQuantumSystem.from_eigenvalues(fl.eigenvalues)
    files, checks, summary = {}, [], {}
    times = np.linspace(0.0, fl.t_max, fl.n_times)
    if fl.omega0:
        traj = pq.thooft_flow(sys_, fl.kappa, pq.FlowState(0.0, float(fl.omega0[0])), times)
        files["flow.csv"] = csv_text(traj.columns(), traj.rows())
        rise = float(np.max(np.diff(traj.F_squared), initial=0.0))
        checks.append(Check("F_squared_increase", rise, 0.0))
        try:
            E, T, T_meas = pq.flow_fixed_point(traj)
            summary.update(fixed_point=E, period=T, measured_period=T_meas)
            files["fixed_point.json"] = json_text({"eigenvalue": E, "period": T,
                                                   "measured_period": T_meas})
            checks.append(Check("fixed_point_error", abs(traj.omega[-1, 0] - E), 1e-8))
        except AttractorLabError as exc:
            summary["fixed_point"] = f"{type(exc).__name__}: {exc}"
            checks.append(Check("converged", math.inf, 0.0))
    if fl.basin_min is not None and fl.basin_max is not None:
        n = int(round((fl.basin_max - fl.basin_min) / fl.basin_step)) + 1
        starts = np.linspace(fl.basin_min, fl.basin_max, n)
        bm = pq.basin_map(sys_, fl.kappa, starts, fl.t_max, n_times=fl.n_times)
        files["basin.csv"] = csv_text(("omega0", "fixed_point_index", "convergence_time"), bm.rows())
        assigned = bm.fixed_point_index >= 0
        err = np.abs(bm.final_omega[assigned] - bm.eigenvalues[bm.fixed_point_index[assigned]])
        checks.append(Check("basin_fixed_point_error", float(err.max(initial=0.0)), 1e-8))
        summary["repeller_starts"] = int((~assigned).sum())
    return files, checks, summary


def run_beables(cfg, rng):
    fl = cfg.flow
    model = pq.BeablesModel(np.asarray(fl.beables, dtype=float), fl.kappa, fl.squared)
    times = np.linspace(0.0, fl.t_max, fl.n_times)
    traj = pq.beables_flow(model, np.asarray(fl.omega0, dtype=float), times)
    files = {"flow.csv": csv_text(traj.columns(), traj.rows())}
    lattice = pq.nearest_lattice_point(model, traj.omega[-1])
    err = float(np.abs(traj.omega[-1] - lattice).max())
    rise = float(np.max(np.diff(traj.F_squared), initial=0.0))
    out = {"fixed_vector": lattice, "error": err}
    if fl.sector:
        sector = pq.SuperselectionSector(tuple(fl.sector))
        em = pq.emergent_hamiltonian(sector, lattice, fl.ratio)
        out.update(sector=list(sector.n), case=em.case, energy=em.energy,
                   time_scale=em.time_scale, dominance_ratio=fl.ratio)
    files["fixed_point.json"] = json_text(out)
    checks = [Check("fixed_point_error", err, 1e-6), Check("F_squared_increase", rise, 0.0)]
    return files, checks, {k: v for k, v in out.items() if k != "fixed_vector"} | \
        {"fixed_vector": lattice.tolist()}


RUNNERS = {"basis": run_basis, "delta": run_delta, "parity": run_parity,
           "conservative": run_conservative, "dissipative": run_dissipative,
           "attractor": run_attractor, "prequantum": run_prequantum, "beables": run_beables}


def output_dir(cfg: ScenarioConfig) -> Path:
    env = os.environ.get(OUTPUT_ENV)
    return Path(env) if env else Path(cfg.output_dir)


def _guard_output(out: Path, scenario: str) -> None:
    man = out / MANIFEST
    if man.is_file():
        other = json.loads(man.read_text()).get("scenario")
        if other != scenario:
            raise ConfigError(f"{out} holds outputs of scenario {other!r}")


def run_scenario(cfg: ScenarioConfig, out: Path | None = None) -> RunReport:
    """Execute one scenario and write its outputs; see :class:`RunReport`."""
    out = output_dir(cfg) if out is None else Path(out)
    _guard_output(out, cfg.scenario)
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    try:
        files, checks, summary = RUNNERS[cfg.scenario](cfg, rng)
    except AttractorLabError as exc:
        raise type(exc)(f"scenario {cfg.scenario!r}: {exc}") from exc
    files[MANIFEST] = json_text({"scenario": cfg.scenario, "version": __version__,
                                 "config": cfg.summary(),
                                 "checks": {c.name: {"value": c.value, "threshold": c.threshold,
                                                     "passed": c.passed} for c in checks},
                                 "files": sorted(files)})
    report = RunReport(cfg.scenario, checks, summary)
    report.outputs = emit_outputs(files, out)
    report.wall_time = time.perf_counter() - t0
    return report


# -- command line -----------------------------------------------------------


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    report = run_scenario(cfg)
    print(report.render())
    return 0 if report.ok else 1


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"{args.config}: valid {cfg.scenario} scenario")
    return 0


def _cmd_sweep(args) -> int:
    raw = read_raw(args.config)
    base = Path(args.config).parent
    values = [parse_value(v) for v in args.values.split(",")]
    cfgs = [from_mapping(override(raw, args.param, v), base_dir=base) for v in values]
    root = output_dir(cfgs[0])
    status = 0
    for v, cfg in zip(values, cfgs):
        report = run_scenario(cfg, root / f"{args.param}={v}")
        print(report.render())
        status |= 0 if report.ok else 1
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attractor-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("validate", help="parse and check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("sweep", help="run a scenario for several values of one parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="parameter name, e.g. dynamics.epsilon")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AttractorLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
