"""Command-line entry point wiring scenarios, simulation, sweeps and presets.

Configuration can come from an INI-style file (section [run]) with individual
flags taking precedence.  Exit codes: 0 success, 2 invalid input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import warnings

import numpy as np

from .drift import DriftField, verify_conditions
from .edges import GeometryError, tabulate_edge_coefficients
from .graphdiff import limiting_variance
from .potentials import (GibbsSpec, InputError, classify_critical_points,
                         get_scenario, scenario_names)
from .presets import format_float, preset_names, run_preset, write_csv
from .reeb import build_graph
from .sde import SimConfig, SimulationDiverged, simulate
from .variance import delta_sweep

__all__ = ["main", "build_parser", "validate_config"]

_DEFAULTS = {
    "scenario": "double_well",
    "beta": 0.1,
    "seed": 0,
    "dt_base": 1e-3,
    "thin": 1,
    "observable": "f2",
}


def validate_config(raw: dict):
    """Fill defaults and normalize; returns (config, warnings) or raises."""
    cfg = dict(_DEFAULTS)
    cfg.update({k: v for k, v in raw.items() if v is not None})
    notes = []
    errors = []
    if cfg["scenario"] not in scenario_names():
        errors.append(f"scenario: unknown {cfg['scenario']!r}, "
                      f"expected one of {', '.join(scenario_names())}")
    for key in ("beta", "dt_base"):
        cfg[key] = float(cfg[key])
        if not cfg[key] > 0:
            errors.append(f"{key}: must be positive, got {cfg[key]}")
    cfg["seed"] = int(cfg["seed"])
    cfg["thin"] = int(cfg["thin"])
    if cfg["thin"] < 1:
        errors.append(f"thin: must be >= 1, got {cfg['thin']}")
    if "deltas" in cfg:
        ds = sorted(float(d) for d in cfg["deltas"])
        if ds != [float(d) for d in cfg["deltas"]]:
            notes.append(f"deltas reordered ascending: {ds}")
        if any(d < 0 for d in ds):
            errors.append("deltas: must be nonnegative")
        cfg["deltas"] = ds
        dmax = max(ds) if ds else 0.0
        eff = min(cfg["dt_base"], 0.1 / max(1.0, dmax))
        if eff < cfg["dt_base"]:
            notes.append(f"effective dt capped at {format_float(eff)} "
                         f"(= 0.1/{format_float(dmax)}) by the largest delta")
    if "horizons" in cfg:
        hs = sorted(float(t) for t in cfg["horizons"])
        if any(t <= 0 for t in hs):
            errors.append("horizons: must be positive")
        cfg["horizons"] = hs
    if errors:
        raise InputError("; ".join(errors))
    return cfg, notes


def _load_config_file(path):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise InputError(f"config file {path!r} not found or unreadable")
    out = {}
    for section in parser.sections():
        for key, val in parser.items(section):
            if key in ("deltas", "horizons"):
                out[key] = [float(v) for v in val.split(",") if v.strip()]
            else:
                out[key] = val
    return out


def _csv_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    p = argparse.ArgumentParser(
        prog="irrlangevin",
        description="Irreversible Langevin samplers and their graph limit")
    p.add_argument("--config", help="INI config file; flags take precedence")
    sub = p.add_subparsers(dest="command", required=True)

    sc = sub.add_parser("scenario", help="inspect a potential")
    sc.add_argument("--scenario", default=None)
    sc.add_argument("--json", action="store_true")

    sim = sub.add_parser("simulate", help="integrate one trajectory")
    sim.add_argument("--scenario", default=None)
    sim.add_argument("--beta", type=float, default=None)
    sim.add_argument("--delta", type=float, default=0.0)
    sim.add_argument("--t", type=float, required=True)
    sim.add_argument("--dt", type=float, default=None, dest="dt_base")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--thin", type=int, default=None)
    sim.add_argument("--x0", default="1,0", help="start point 'x,y'")
    sim.add_argument("--out", required=True)

    sw = sub.add_parser("sweep", help="batch-means variance sweep")
    sw.add_argument("--scenario", default=None)
    sw.add_argument("--beta", type=float, default=None)
    sw.add_argument("--deltas", type=_csv_list, default=None)
    sw.add_argument("--horizons", type=_csv_list, default=None)
    sw.add_argument("--replicas", type=int, default=8)
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--observable", default=None)
    sw.add_argument("--out", required=True)

    co = sub.add_parser("coefficients", help="tabulate edge coefficients")
    co.add_argument("--scenario", default=None)
    co.add_argument("--beta", type=float, default=None)
    co.add_argument("--grid", type=int, default=128)
    co.add_argument("--observable", default=None)
    co.add_argument("--out", required=True)

    gr = sub.add_parser("graph", help="show the level-set graph")
    gr.add_argument("action", nargs="?", default="show", choices=["show"])
    gr.add_argument("--scenario", default=None)
    gr.add_argument("--json", action="store_true")

    gl = sub.add_parser("graph-limit", help="limiting variance on the graph")
    gl.add_argument("--scenario", default=None)
    gl.add_argument("--beta", type=float, default=None)
    gl.add_argument("--observable", default=None)
    gl.add_argument("--grid", type=int, default=128)
    gl.add_argument("--out", required=True)

    pr = sub.add_parser("preset", help="run a reproduction preset")
    pr.add_argument("name")
    pr.add_argument("--seed", type=int, default=None)
    pr.add_argument("--out-dir", default="out")
    return p


def _merged_config(args, keys):
    raw = {}
    if getattr(args, "config", None):
        raw.update(_load_config_file(args.config))
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            raw[k] = v
    cfg, notes = validate_config(raw)
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    return cfg


def _cmd_scenario(args):
    cfg = _merged_config(args, ["scenario"])
    scen = get_scenario(cfg["scenario"])
    cps = classify_critical_points(scen)
    if args.json:
        doc = {
            "name": scen.name,
            "observables": sorted(scen.observables),
            "critical_points": [
                {"location": list(map(float, c.location)),
                 "value": c.value, "kind": c.kind} for c in cps],
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"scenario {scen.name}")
        print(f"observables: {', '.join(sorted(scen.observables))}")
        for c in cps:
            print(f"  {c.kind:8s} at ({c.location[0]:+.6g}, "
                  f"{c.location[1]:+.6g})  U = {c.value:.6g}")
    return 0


def _cmd_simulate(args):
    cfg = _merged_config(args, ["scenario", "beta", "seed", "dt_base", "thin"])
    scen = get_scenario(cfg["scenario"])
    x0 = tuple(float(v) for v in args.x0.split(","))
    sim_cfg = SimConfig(
        gibbs_spec=GibbsSpec(scen, cfg["beta"]),
        drift_field=DriftField(scen, delta=args.delta),
        x0=x0, t_final=args.t, seed=cfg["seed"],
        dt_base=cfg["dt_base"], thin=cfg["thin"])
    traj = simulate(sim_cfg)
    rows = zip(traj.times, traj.states[:, 0], traj.states[:, 1])
    write_csv(args.out, ["t", "x", "y"], rows)
    print(f"wrote {args.out} ({len(traj.times)} rows, "
          f"dt = {format_float(traj.dt_effective)})")
    return 0


def _cmd_sweep(args):
    cfg = _merged_config(args, ["scenario", "beta", "seed", "dt_base",
                                "observable", "deltas", "horizons"])
    if "deltas" not in cfg or "horizons" not in cfg:
        raise InputError("sweep requires --deltas and --horizons")
    from .presets import _sweep_cells
    agg, rep = _sweep_cells(cfg["scenario"], cfg["deltas"], cfg["horizons"],
                            args.replicas, cfg["seed"], cfg["observable"])
    write_csv(args.out, ["delta", "t", "kind", "method", "value", "ci",
                         "n_batches", "dt", "seed"], agg)
    print(f"wrote {args.out} ({len(agg)} rows)")
    return 0


def _cmd_coefficients(args):
    cfg = _merged_config(args, ["scenario", "beta", "observable"])
    scen = get_scenario(cfg["scenario"])
    top = build_graph(scen)
    f = scen.observables[cfg["observable"]]
    coeffs = tabulate_edge_coefficients(top, f, cfg["beta"], n_grid=args.grid)
    rows = []
    for c in coeffs:
        for k in range(len(c.z_grid)):
            rows.append((c.edge_id, c.z_grid[k], c.T[k], c.A_hat[k], c.M[k],
                         c.f_hat[k], c.drift[k], c.diffusion_var[k]))
    write_csv(args.out, ["edge", "z", "T", "A_hat", "M", "f_hat", "drift",
                         "diffusion_var"], rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_graph(args):
    cfg = _merged_config(args, ["scenario"])
    top = build_graph(get_scenario(cfg["scenario"]))
    if args.json:
        doc = {
            "scenario": top.scenario.name,
            "z_max": top.z_max,
            "vertices": [
                {"id": v.id, "z": v.z, "kind": v.kind,
                 "location": (list(map(float, v.location))
                              if v.location is not None else None)}
                for v in top.vertices],
            "edges": [
                {"id": e.id, "z_lo": e.z_lo, "z_hi": e.z_hi,
                 "lower": e.lower, "upper": e.upper} for e in top.edges],
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"graph of {top.scenario.name} (z_max = {top.z_max:g})")
        print("vertices:")
        for v in top.vertices:
            print(f"  {v.id:10s} z = {v.z:<8g} {v.kind}")
        print("edges:")
        for e in top.edges:
            print(f"  {e.id:4s} ({e.z_lo:g}, {e.z_hi:g})  "
                  f"{e.lower} -> {e.upper}")
    return 0


def _cmd_graph_limit(args):
    cfg = _merged_config(args, ["scenario", "beta", "observable"])
    scen = get_scenario(cfg["scenario"])
    top = build_graph(scen)
    f = scen.observables[cfg["observable"]]
    est = limiting_variance(top, f, cfg["beta"], n_grid=args.grid)
    write_csv(args.out,
              ["scenario", "beta", "observable", "sigma2_limit", "grid",
               "method"],
              [(scen.name, cfg["beta"], cfg["observable"], est.value,
                str(args.grid), est.method)])
    print(f"wrote {args.out} (sigma2_limit = {format_float(est.value)})")
    return 0


def _cmd_preset(args):
    cfg = _merged_config(args, ["seed"])
    manifest = run_preset(args.name, cfg["seed"], args.out_dir)
    for fname, digest in sorted(manifest["files"].items()):
        print(f"{digest}  {fname}")
    return 0


_COMMANDS = {
    "scenario": _cmd_scenario,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "coefficients": _cmd_coefficients,
    "graph": _cmd_graph,
    "graph-limit": _cmd_graph_limit,
    "preset": _cmd_preset,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationDiverged, GeometryError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
