"""Command-line driver: every experiment as a reproducible command.

Exit-code contract: 0 = all checks passed, 2 = a scientific claim failed,
3 = internal consistency failed, 64 = usage error. Outputs embed the fully
resolved configuration and a schema version so a run can be reproduced from
its own files. Configuration precedence: flags > config file > defaults.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import (
    DIRICHLET,
    PERIODIC,
    Field,
    GroundState,
    SimulationConfig,
    closed_form_identities,
    constrained_form_minimum,
    critical_speed,
    eigenpairs,
    essential_spectrum_edge,
    evolve,
    instability_experiment,
    kappa_closed_form,
    make_grid,
    negativity_table,
    norm_h1,
    translate,
)
from .structure import DualPathError

SCHEMA = "gbbmlab/1"
EXIT_OK = 0
EXIT_CLAIM = 2
EXIT_CONSISTENCY = 3
EXIT_USAGE = 64

DEFAULTS = {
    "L": 50.0 * math.pi,
    "N": 8192,
    "dt": 1e-3,
    "t_end": 20.0,
    "a": 0.01,
    "R": 0.0,  # 0 means auto (10 / tail rate)
    "p": 5.0,
    "p_list": "4.1,4.5,5,6,6.5,10,30,50,70,100",
    "format": "csv",
    "workers": 1,
}


def _load_config_file(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS and key not in ("out",):
            raise ValueError(f"unknown config key {key!r}")
        out[key] = val
    return out


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg["out"] = "out"
    if args.config:
        cfg.update(_load_config_file(args.config))
    for key in ("L", "N", "dt", "t_end", "a", "R", "p", "p_list", "format", "out", "workers"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    cfg["L"] = float(cfg["L"])
    cfg["N"] = int(cfg["N"])
    cfg["dt"] = float(cfg["dt"])
    cfg["t_end"] = float(cfg["t_end"])
    cfg["a"] = float(cfg["a"])
    cfg["R"] = float(cfg["R"])
    cfg["p"] = float(cfg["p"])
    cfg["workers"] = int(cfg["workers"])
    if cfg["format"] not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {cfg['format']!r}")
    return cfg


def _embedded(cfg: dict) -> dict:
    # the output directory is not part of the computation
    return {k: v for k, v in cfg.items() if k != "out"}


def _config_header(cfg: dict, command: str) -> str:
    emb = _embedded(cfg)
    pairs = " ".join(f"{k}={emb[k]}" for k in sorted(emb))
    return f"# schema={SCHEMA} command={command} {pairs}\n"


def _write(outdir: Path, name: str, text: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / name).write_text(text)


def _json_doc(cfg: dict, command: str, payload) -> str:
    return json.dumps(
        {"schema": SCHEMA, "command": command, "config": _embedded(cfg), "result": payload},
        indent=2,
        default=float,
    )


def cmd_table(cfg: dict) -> int:
    p_list = [float(s) for s in str(cfg["p_list"]).split(",") if s.strip()]
    if not p_list:
        print("error: empty p_list", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = negativity_table(
            p_list, L=cfg["L"], n_request=cfg["N"], workers=cfg["workers"]
        )
    except DualPathError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    outdir = Path(cfg["out"])
    _write(outdir, "table.csv", _config_header(cfg, "table") + report.to_csv())
    rows = json.loads(report.to_json())
    _write(outdir, "table.json", _json_doc(cfg, "table", rows))
    for r in report.rows:
        print(f"p={r.p:<6g} c0={r.c0:.6f} <hess(Gamma),Gamma>={r.form_value:.2f} "
              f"negative={r.negative}")
    if not report.all_negative():
        print("claim failure: a table row is not negative", file=sys.stderr)
        return EXIT_CLAIM
    return EXIT_OK


def cmd_identities(cfg: dict) -> int:
    p = cfg["p"]
    gs = GroundState(p, critical_speed(p))
    grid = make_grid(cfg["L"], cfg["N"], DIRICHLET)
    report = closed_form_identities(gs, grid)
    outdir = Path(cfg["out"])
    payload = json.loads(report.to_json())
    _write(outdir, "identities.json", _json_doc(cfg, "identities", payload))
    lines = ["name,closed_form,quadrature,rel_error"]
    for r in report.records:
        lines.append(f"{r.name},{r.closed_form!r},{r.quadrature!r},{r.rel_error!r}")
        print(f"{r.name:<16} rel_error={r.rel_error:.3e}")
    _write(outdir, "identities.csv", _config_header(cfg, "identities") + "\n".join(lines) + "\n")
    return EXIT_OK if report.max_rel_error() < 1e-8 else EXIT_CLAIM


def cmd_spectrum(cfg: dict) -> int:
    p = cfg["p"]
    gs = GroundState(p, critical_speed(p))
    grid = make_grid(cfg["L"], min(cfg["N"], 4096), DIRICHLET)
    report = eigenpairs(gs, grid, m=6)
    _write(Path(cfg["out"]), "spectrum.json",
           _json_doc(cfg, "spectrum", json.loads(report.to_json())))
    print(f"negative_count={report.negative_count} "
          f"kernel_eigenvalue={report.kernel_eigenvalue:.3e} "
          f"kernel_overlap={report.kernel_overlap:.6f}")
    return EXIT_OK if report.negative_count == 1 else EXIT_CLAIM


def cmd_coercivity(cfg: dict) -> int:
    p = cfg["p"]
    gs = GroundState(p, critical_speed(p))
    grid = make_grid(cfg["L"], min(cfg["N"], 2048), DIRICHLET)
    constraints = {
        "translation_mode": gs.profile_dx(grid),
        "kappa": kappa_closed_form(gs, grid),
    }
    report = constrained_form_minimum(gs, grid, constraints)
    _write(Path(cfg["out"]), "coercivity.json",
           _json_doc(cfg, "coercivity", json.loads(report.to_json())))
    threshold = 1e-3 * essential_spectrum_edge(gs)
    print(f"raw_min={report.raw_min:.6f} constrained_min={report.constrained_min:.6f} "
          f"(positivity threshold {threshold:.2e})")
    if report.constrained_min <= threshold:
        print("claim failure: constrained minimum is not strictly positive",
              file=sys.stderr)
        return EXIT_CLAIM
    return EXIT_OK


def cmd_evolve(cfg: dict) -> int:
    p = cfg["p"]
    c = critical_speed(p)
    gs = GroundState(p, c)
    grid = make_grid(cfg["L"], cfg["N"], PERIODIC)
    phi = gs.profile(grid)
    config = SimulationConfig(grid, p, cfg["dt"], cfg["t_end"],
                              record_every=max(1, int(round(0.5 / cfg["dt"]))))
    traj = evolve(phi, config)
    exact = translate(phi, -c * cfg["t_end"])
    sup_err = float(np.max(np.abs(traj.states[-1].values - exact.values)))
    outdir = Path(cfg["out"])
    _write(outdir, "evolve_series.csv", _config_header(cfg, "evolve") + traj.series_csv())
    payload = {
        "energy_drift": traj.energy_drift(),
        "momentum_drift": traj.momentum_drift(),
        "soliton_sup_error": sup_err,
    }
    _write(outdir, "evolve.json", _json_doc(cfg, "evolve", payload))
    print(f"E drift={payload['energy_drift']:.3e} Q drift={payload['momentum_drift']:.3e} "
          f"soliton sup error={sup_err:.3e}")
    ok = payload["energy_drift"] < 1e-8 and payload["momentum_drift"] < 1e-8
    return EXIT_OK if ok else EXIT_CLAIM


def cmd_instability(cfg: dict) -> int:
    grid = make_grid(cfg["L"], cfg["N"], PERIODIC)
    report = instability_experiment(
        cfg["p"], cfg["a"], grid, dt=cfg["dt"], t_end=cfg["t_end"],
        R=cfg["R"] if cfg["R"] > 0 else None,
    )
    outdir = Path(cfg["out"])
    _write(outdir, "instability.json", _json_doc(cfg, "instability",
                                                 json.loads(report.to_json())))
    _write(outdir, "instability_frames.csv",
           _config_header(cfg, "instability") + report.frames_csv())
    print(f"verdict={report.verdict} mode={report.mode} "
          f"positive_fraction={report.positive_fraction:.3f} "
          f"negative_fraction={report.negative_fraction:.3f} "
          f"|lambda-c| at end={report.lambda_shift_at_end:.3e}")
    if report.verdict == "modulation-failed":
        return EXIT_CONSISTENCY
    return EXIT_OK if report.positive_fraction >= 0.95 else EXIT_CLAIM


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gbbmlab",
        description="gBBM critical-speed solitary-wave laboratory",
    )
    ap.add_argument("--config", help="flat key=value config file")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("table", "identities", "spectrum", "coercivity", "evolve", "instability"):
        sp = sub.add_parser(name)
        sp.add_argument("--p", type=float)
        sp.add_argument("--p-list", dest="p_list")
        sp.add_argument("--L", type=float)
        sp.add_argument("--N", type=int)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-end", dest="t_end", type=float)
        sp.add_argument("--a", type=float)
        sp.add_argument("--R", type=float)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--workers", type=int)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        cfg = _resolve(args)
    except (ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handlers = {
        "table": cmd_table,
        "identities": cmd_identities,
        "spectrum": cmd_spectrum,
        "coercivity": cmd_coercivity,
        "evolve": cmd_evolve,
        "instability": cmd_instability,
    }
    try:
        return handlers[args.command](cfg)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
