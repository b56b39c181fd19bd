"""Command-line runner: ``qedsim run | validate | presets``.

Each experiment writes one CSV table (header fixed per experiment, numbers
as ``%.17g``) and one JSON manifest holding the resolved config, the package
version and every derived scalar.  Exit codes: 0 success, 2 invalid config,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, ConfigError, RunConfig, parse_config
from .dynamics import (
    NumericalAbort,
    run_hall_experiment,
    run_nonabelian_loop,
    zitterbewegung_probe,
    evolve,
)
from .geometry import DegeneracyError, LoopSpec, berry_phase, classify_intersection, heisenberg_force
from .models import (
    ModelError,
    adiabatic_surfaces,
    build_hamiltonian,
    diabatic_surfaces,
    dirac_oscillator_jc_match,
    extract_gauge_potentials,
    jahn_teller_threshold,
    locate_minima,
)
from .operators import SpaceError, basis_ket, coherent_ket, truncation_loss

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 2, 3

TRACE_COLUMNS = ("W", "X", "Y", "n_x", "n_y", "trace")

HEADERS = {
    "surface": None,  # P,V_minus,V_plus[,V_zero]
    "minima": ("g", "regime", "n_minima", "P_min", "V_min"),
    "gauge": ("variant", "classification", "n_components", "max_commutator", "rewrite_residual"),
    "berry": ("n_points", "phase", "phase_extrapolated", "error_estimate"),
    "classify": ("kind", "gap_at_origin", "exponent"),
    "evolve": ("t",) + TRACE_COLUMNS,
    "nonabelian": ("direction", "t") + TRACE_COLUMNS,
    "hall": ("atom_level", "t") + TRACE_COLUMNS,
    "zitter": ("t", "X"),
    "diracjc": ("level", "E_dirac_oscillator", "E_jaynes_cummings", "abs_dev"),
    "force": ("component", "basis_operator", "coefficient"),
}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if v is None:
        return "nan"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else None
    return v


def _trace_rows(rec, prefix=()):
    rows = []
    s = rec.series
    for i, t in enumerate(rec.times):
        rows.append(prefix + (t,) + tuple(s[c][i] if c in s else None for c in TRACE_COLUMNS))
    return rows


def _check_abort(rec):
    if rec.metadata.get("aborted"):
        raise NumericalAbort(rec.metadata.get("abort_reason", "aborted"), rec.metadata.get("abort_step", -1))


def _drift(rec) -> float:
    """Norm drift for kets, trace drift for density matrices."""
    return rec.metadata.get("norm_drift", rec.metadata.get("trace_drift"))


# ---------------------------------------------------------------------------
# experiments: each returns (header, rows, scalars)


def _surface(cfg, spec, scale):
    p = cfg.params
    axis = np.linspace(p["p_min"], p["p_max"], p["n_points"])
    # two-mode variants are tabulated along the cut P_y = 0
    grid = axis if len(spec.mode_labels) == 1 else (axis, np.array([-1.0, 0.0, 1.0]))
    fn = adiabatic_surfaces if p["kind"] == "adiabatic" else diabatic_surfaces
    br = fn(spec, grid).branches
    if br.ndim == 3:
        br = br[:, :, 1]
    br = br * scale
    if br.shape[0] == 2:
        header = ("P", "V_minus", "V_plus")
        cols = (br[0], br[1])
    else:
        header = ("P", "V_minus", "V_plus", "V_zero")
        cols = (br[0], br[2], br[1])
    rows = [(x,) + tuple(c[i] for c in cols) for i, x in enumerate(axis)]
    scalars = {"kind": p["kind"], "min_V_minus": float(br[0].min()), "cut": "P_y=0" if len(spec.mode_labels) == 2 else None}
    return header, rows, scalars


def _minima(cfg, spec, scale):
    gs = cfg.params["g_values"] or [spec.g]
    rows, reports = [], []
    for g in gs:
        rep = locate_minima(spec.replace(g=float(g)))
        for point, v in rep.minima:
            rows.append((float(g), rep.regime, len(rep.minima), point[0], v * scale))
        reports.append({"g": float(g), "regime": rep.regime, "ring_radius": rep.ring_radius})
    base = locate_minima(spec)
    scalars = {"threshold_closed_form": base.threshold, "threshold_printed": base.threshold_printed,
               "regimes": reports}
    if spec.variant == "BetaE":
        scalars["threshold_bisection"] = jahn_teller_threshold(spec.omegas[0], spec.Omega).bisection
    return HEADERS["minima"], rows, scalars


def _gauge(cfg, spec, scale):
    rep = extract_gauge_potentials(spec, cfg.space())
    row = (spec.variant, rep.classification, len(rep.components), rep.max_commutator, rep.rewrite_residual)
    scalars = {"classification": rep.classification, "max_commutator": rep.max_commutator,
               "rewrite_residual": rep.rewrite_residual}
    return HEADERS["gauge"], [row], scalars


def _berry(cfg, spec, scale):
    p = cfg.params
    loop = LoopSpec(tuple(p["center"]), p["radius"], p["n_points"], p["branch"], p["start_angle"])
    bp = berry_phase(spec, loop)
    row = (bp.n_points, bp.phase, bp.extrapolated, bp.error)
    scalars = {"phase": bp.phase, "phase_extrapolated": bp.extrapolated, "error_estimate": bp.error}
    return HEADERS["berry"], [row], scalars


def _classify(cfg, spec, scale):
    rep = classify_intersection(spec)
    row = (rep.kind, rep.gap_at_origin * scale, rep.exponent)
    scalars = {"kind": rep.kind, "gap_at_origin": rep.gap_at_origin * scale, "exponent": rep.exponent,
               "branches": list(rep.branches)}
    return HEADERS["classify"], [row], scalars


def _evolve(cfg, spec, scale):
    p = cfg.params
    space = cfg.space()
    alpha = p["alpha"] * np.exp(1j * p["phase"])
    if p["fock"]:
        psi0 = basis_ket(space, p["atom_level"], {p["mode"]: p["fock"]})
    else:
        psi0 = coherent_ket(space, p["mode"], alpha, level=p["atom_level"], allow_truncation=True)
    rec = evolve(build_hamiltonian(spec, space), psi0, cfg.losses(), cfg.evolution())
    _check_abort(rec)
    scalars = {k: v for k, v in rec.metadata.items() if k in ("norm_drift", "trace_drift")}
    scalars["truncation_loss"] = truncation_loss(space.cutoff(p["mode"]), alpha) if not p["fock"] else 0.0
    return HEADERS["evolve"], _trace_rows(rec), scalars


def _nonabelian(cfg, spec, scale):
    p = cfg.params
    rows, recs = [], {}
    for d in ("cw", "ccw"):
        phase = p[f"phase_{d}"]
        rec = run_nonabelian_loop(spec, d, p["alpha_mag"], cfg.losses(), cfg.evolution(),
                                  space=cfg.space(), phase=phase)
        _check_abort(rec)
        recs[d] = rec
        rows += _trace_rows(rec, (d,))
    diff = float(np.max(np.abs(recs["cw"].series["W"] - recs["ccw"].series["W"])))
    scalars = {"max_abs_W_difference": diff, "phase_cw": recs["cw"].metadata["phase"],
               "phase_ccw": recs["ccw"].metadata["phase"], "truncation_loss": recs["cw"].metadata["truncation_loss"],
               "drift": {d: _drift(r) for d, r in recs.items()}}
    return HEADERS["nonabelian"], rows, scalars


def _hall(cfg, spec, scale):
    p = cfg.params
    rows, per = [], {}
    for lvl in p["atom_levels"]:
        rec = run_hall_experiment(spec, lvl, p["alpha_mag"], cfg.losses(), cfg.evolution(),
                                  space=cfg.space(), sense_periods=p["sense_periods"])
        _check_abort(rec)
        rows += _trace_rows(rec, (lvl,))
        m = rec.metadata
        per[str(lvl)] = {k: m[k] for k in ("swept_area", "swept_area_total", "sense_window", "transfer_ratio", "truncation_loss")}
        per[str(lvl)]["drift"] = _drift(rec)
    return HEADERS["hall"], rows, {"per_atom_level": per}


def _zitter(cfg, spec, scale):
    res = zitterbewegung_probe(spec, cfg.params["seed_alpha"], cfg.evolution(), space=cfg.space())
    rec = res.trajectory
    _check_abort(rec)
    rows = [(t, x) for t, x in zip(rec.times, rec.series["X"])]
    scalars = {"frequency": res.frequency * scale, "gap": res.gap * scale,
               "relative_error": abs(res.frequency - res.gap) / res.gap,
               "energies": [e * scale for e in res.energies]}
    return HEADERS["zitter"], rows, scalars


def _diracjc(cfg, spec, scale):
    m = dirac_oscillator_jc_match(spec, cfg.space(), tol=cfg.params["tol"])
    k = min(m.dirac_levels.size, m.jc_levels.size)
    rows = [(i, m.dirac_levels[i] * scale, m.jc_levels[i] * scale, abs(m.dirac_levels[i] - m.jc_levels[i]) * scale)
            for i in range(k)]
    scalars = {"matched_levels": m.matched_levels, "max_dev": m.max_dev * scale, "coupling": m.coupling * scale}
    return HEADERS["diracjc"], rows, scalars


def _force(cfg, spec, scale):
    rep = heisenberg_force(spec, cfg.space())
    rows = [(comp, name, c) for comp, cs in rep.coefficients.items() for name, c in cs.items()]
    return HEADERS["force"], rows, {"coefficients": rep.coefficients, "interior_residual": rep.interior_residual}


EXPERIMENT_RUNNERS = {
    "surface": _surface, "minima": _minima, "gauge": _gauge, "berry": _berry, "classify": _classify,
    "evolve": _evolve, "nonabelian": _nonabelian, "hall": _hall, "zitter": _zitter,
    "diracjc": _diracjc, "force": _force,
}


def execute(cfg: RunConfig) -> tuple[str, str]:
    """Run ``cfg`` in memory; returns ``(csv_text, manifest_text)``."""
    spec = cfg.model_spec()
    header, rows, scalars = EXPERIMENT_RUNNERS[cfg.experiment](cfg, spec, cfg["output"]["hbar_display"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    manifest = {
        "tool": "qedsim",
        "version": __version__,
        "experiment": cfg.experiment,
        "columns": list(header),
        "n_rows": len(rows),
        "config": cfg.to_dict(),
        "results": _jsonable(scalars),
    }
    return buf.getvalue(), json.dumps(manifest, indent=2, sort_keys=True) + "\n"


def run(cfg: RunConfig, out_dir: str | os.PathLike | None = None) -> int:
    """Run ``cfg`` and write its CSV and manifest; returns the exit code.

    Outputs are written to temporary names and renamed only on success, so
    an abort leaves nothing behind.
    """
    out = Path(out_dir if out_dir is not None else cfg["output"]["dir"])
    try:
        csv_text, manifest_text = execute(cfg)
    except (NumericalAbort, DegeneracyError, FloatingPointError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ConfigError, ModelError, SpaceError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out.mkdir(parents=True, exist_ok=True)
    targets = [(out / cfg["output"]["csv"], csv_text), (out / cfg["output"]["manifest"], manifest_text)]
    temps = []
    try:
        for path, text in targets:
            tmp = path.with_name(path.name + ".partial")
            tmp.write_text(text)
            temps.append((tmp, path))
        for tmp, path in temps:
            os.replace(tmp, path)
    finally:
        for tmp, _ in temps:
            if tmp.exists():
                tmp.unlink()
    return EXIT_OK


def _load(path: str) -> RunConfig:
    return parse_config(Path(path).read_text())


def _run_one(path: str, out: str | None) -> int:
    try:
        cfg = _load(path)
    except (ConfigError, OSError) as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qedsim", description="Cavity-QED gauge-potential simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one or more config files")
    p_run.add_argument("configs", nargs="+", metavar="config-path")
    p_run.add_argument("--out", help="output directory (overrides output.dir)")
    p_run.add_argument("--jobs", type=int, default=1, help="configs to run concurrently")
    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("config", metavar="config-path")
    p_pre = sub.add_parser("presets", help="list or print shipped configs")
    p_pre.add_argument("action", choices=("list", "emit"))
    p_pre.add_argument("name", nargs="?")
    args = parser.parse_args(argv)

    if args.command == "validate":
        try:
            cfg = _load(args.config)
        except (ConfigError, OSError) as exc:
            print(f"{args.config}: {exc}", file=sys.stderr)
            return EXIT_INVALID
        sys.stdout.write(cfg.dumps())
        return EXIT_OK

    if args.command == "presets":
        if args.action == "list":
            for name, (desc, _) in PRESETS.items():
                print(f"{name:20s} {desc}")
            return EXIT_OK
        if args.name not in PRESETS:
            print(f"unknown preset {args.name!r}; try 'qedsim presets list'", file=sys.stderr)
            return EXIT_INVALID
        sys.stdout.write(PRESETS[args.name][1])
        return EXIT_OK

    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if len(args.configs) == 1:
        return _run_one(args.configs[0], args.out)
    # sweep mode: one subdirectory per config, named after the file stem
    stems = [Path(c).stem for c in args.configs]
    if len(set(stems)) != len(stems):
        print("config file names must be distinct in sweep mode", file=sys.stderr)
        return EXIT_INVALID
    outs = []
    for c, stem in zip(args.configs, stems):
        if args.out is not None:
            outs.append(str(Path(args.out) / stem))
        else:
            try:
                outs.append(str(Path(_load(c)["output"]["dir"]) / stem))
            except (ConfigError, OSError) as exc:
                print(f"{c}: {exc}", file=sys.stderr)
                return EXIT_INVALID
    if args.jobs == 1:
        codes = [_run_one(c, o) for c, o in zip(args.configs, outs)]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_one, args.configs, outs))
    for c, code in zip(args.configs, codes):
        print(f"{c}: exit {code}")
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
