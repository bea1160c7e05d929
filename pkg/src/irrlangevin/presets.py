"""Reproduction presets: canned experiment bundles writing CSV artifacts.

Each preset is deterministic given (name, seed): every CSV it writes is
byte-identical across re-runs and worker counts, and the manifest records a
content hash per file so downstream consumers can detect parameter drift.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os

import numpy as np

from .drift import DriftField
from .edges import tabulate_edge_coefficients
from .graphdiff import limiting_variance
from .potentials import GibbsSpec, InputError, get_scenario
from .reeb import build_graph
from .sde import ReplicaFailure, SimConfig, simulate
from . import rng as _rng
from .variance import batch_means_variance

__all__ = ["run_preset", "preset_names", "format_float", "write_csv"]

BETA = 0.1


def format_float(x) -> str:
    """Locale-independent decimal with 17 significant digits."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                c if isinstance(c, str) else format_float(c) for c in row
            ) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _trajectory_csv(path, traj):
    rows = zip(traj.times, traj.states[:, 0], traj.states[:, 1])
    write_csv(path, ["t", "x", "y"], rows)


def _stability_factor(delta):
    # the rotation term makes explicit Euler weakly expansive; keep the
    # spurious radial growth (delta*dt)^2/2 well below the contraction dt
    if delta <= 10.0:
        return 0.1
    return 2.0 / delta * 0.05


def _sweep_cells(scenario_name, deltas, horizons, n_replicas, seed,
                 observable_name="f2", t_extra=0.0, n_batches=None):
    """Per-replica batch-means estimates on horizon prefixes of one path."""
    scen = get_scenario(scenario_name)
    gs = GibbsSpec(scen, BETA)
    f = scen.observables[observable_name]
    x0 = (1.0, 0.0) if scenario_name == "double_well" else (0.5, 0.5)
    t_max = max(horizons) + t_extra
    agg_rows, replica_rows = [], []
    for d in deltas:
        field = DriftField(scen, delta=float(d))
        cfg0 = SimConfig(gibbs_spec=gs, drift_field=field, x0=x0,
                         t_final=t_max, seed=seed,
                         stability_factor=_stability_factor(d))
        # thin the kept path to 1e-3 spacing so memory stays flat across delta
        thin = max(1, round(1e-3 / cfg0.dt_effective))
        cfg0 = dataclasses.replace(cfg0, thin=thin)
        per_cell = {t: [] for t in horizons}
        for r in range(n_replicas):
            rseed = _rng.derive_seed(seed, r)
            cfg = dataclasses.replace(cfg0, seed=rseed)
            try:
                traj = simulate(cfg)
            except Exception:
                for t in horizons:
                    replica_rows.append((d, t, "failed", "batch_means",
                                         float("nan"), float("nan"), 0,
                                         cfg.dt_effective, rseed))
                continue
            step = traj.dt_effective * traj.thin
            for t in horizons:
                k = int(np.floor(t / step + 1e-9))
                sub = dataclasses.replace(traj, times=traj.times[:k + 1],
                                          states=traj.states[:k + 1])
                est, _ = batch_means_variance(sub, f, n_batches, d)
                per_cell[t].append(est)
                replica_rows.append((d, t, est.kind, est.method, est.value,
                                     est.ci_halfwidth, est.n_batches,
                                     est.dt, rseed))
        for t in horizons:
            ests = per_cell[t]
            if not ests:
                agg_rows.append((d, t, "failed", "batch_means", float("nan"),
                                 float("nan"), 0, cfg0.dt_effective, seed))
                continue
            vals = np.array([e.value for e in ests])
            med = float(np.median(vals))
            hw = (1.959964 * float(np.std(vals, ddof=1)) / np.sqrt(len(vals))
                  if len(vals) > 1 else ests[0].ci_halfwidth)
            agg_rows.append((d, t, ests[0].kind, "batch_means", med, hw,
                             ests[0].n_batches, ests[0].dt, seed))
    return agg_rows, replica_rows


def _preset_table1(seed, out_dir):
    deltas = (0.0, 1.0, 100.0)
    horizons = (25.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0)
    agg, rep = _sweep_cells("double_well", deltas, horizons, 8, seed)
    header = ["delta", "t", "kind", "method", "value", "ci", "n_batches",
              "dt", "seed"]
    f1 = os.path.join(out_dir, "table1.csv")
    f2 = os.path.join(out_dir, "table1_replicas.csv")
    write_csv(f1, header, agg)
    write_csv(f2, header, rep)
    return [f1, f2]


def _preset_fig1a_sweep(seed, out_dir):
    deltas = (0.0, 1.0, 10.0, 100.0)
    horizons = (25.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0)
    agg, rep = _sweep_cells("bowl", deltas, horizons, 8, seed)
    header = ["delta", "t", "kind", "method", "value", "ci", "n_batches",
              "dt", "seed"]
    f1 = os.path.join(out_dir, "fig1a_sweep.csv")
    f2 = os.path.join(out_dir, "fig1a_sweep_replicas.csv")
    write_csv(f1, header, agg)
    write_csv(f2, header, rep)
    return [f1, f2]


def _preset_fig1_trajectories(seed, out_dir):
    scen = get_scenario("bowl")
    gs = GibbsSpec(scen, BETA)
    files = []
    for d in (0.0, 10.0):
        cfg = SimConfig(gibbs_spec=gs, drift_field=DriftField(scen, delta=d),
                        x0=(1.0, 0.0), t_final=20.0,
                        seed=_rng.derive_seed(seed, int(d)), thin=10)
        traj = simulate(cfg)
        path = os.path.join(out_dir, f"fig1_bowl_delta{int(d)}.csv")
        _trajectory_csv(path, traj)
        files.append(path)
    return files


def _preset_fig78_metastable(seed, out_dir):
    scen = get_scenario("double_well")
    gs = GibbsSpec(scen, BETA)
    files = []
    for d in (0.0, 10.0, 100.0, 300.0):
        cfg0 = SimConfig(gibbs_spec=gs, drift_field=DriftField(scen, delta=d),
                         x0=(1.0, 0.0), t_final=500.0,
                         seed=_rng.derive_seed(seed, int(d)),
                         stability_factor=_stability_factor(d))
        thin = max(1, round(0.05 / cfg0.dt_effective))
        cfg = dataclasses.replace(cfg0, thin=thin)
        traj = simulate(cfg)
        path = os.path.join(out_dir, f"fig78_double_well_delta{int(d)}.csv")
        _trajectory_csv(path, traj)
        files.append(path)
    return files


def _preset_graph_limits(seed, out_dir):
    rows = []
    grid = 128
    for name in ("bowl", "double_well"):
        scen = get_scenario(name)
        top = build_graph(scen)
        f = scen.observables["f2"]
        coeffs = tabulate_edge_coefficients(top, f, BETA, n_grid=grid)
        est = limiting_variance(top, f, BETA, coeffs=coeffs)
        rows.append((name, BETA, "f2", est.value, str(grid), est.method))
    path = os.path.join(out_dir, "graph_limits.csv")
    write_csv(path, ["scenario", "beta", "observable", "sigma2_limit",
                     "grid", "method"], rows)
    return [path]


_PRESETS = {
    "table1": _preset_table1,
    "fig1_trajectories": _preset_fig1_trajectories,
    "fig78_metastable": _preset_fig78_metastable,
    "fig1a_sweep": _preset_fig1a_sweep,
    "graph_limits": _preset_graph_limits,
}


def preset_names():
    return sorted(_PRESETS)


def run_preset(name, seed, out_dir):
    """Run one preset; returns the manifest dict (also written as JSON)."""
    if name not in _PRESETS:
        raise InputError(
            f"unknown preset {name!r}; valid presets: {', '.join(preset_names())}"
        )
    os.makedirs(out_dir, exist_ok=True)
    files = _PRESETS[name](int(seed), out_dir)
    manifest = {
        "preset": name,
        "seed": int(seed),
        "beta": BETA,
        "files": {os.path.basename(f): _sha256(f) for f in files},
    }
    mpath = os.path.join(out_dir, f"{name}_manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
