"""Config-driven command line: mane | flow | connect | epdiff | check.

Exit codes: 0 success, 2 config error, 3 precondition failure (subcritical
energy), 4 non-convergence, 5 numerical failure.  All reports are JSON with
sorted keys; identical config + seed produce bit-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import algebra as al
from . import checks
from . import epdiff as ep
from .config import (ConfigError, field_from_spec, group_point_from_spec,
                     load_config)
from .finsler import ConnectOptions, ConvergenceError, SubcriticalEnergyError
from .flow import (PhasePoint, integrate_hamiltonian, integrate_magnetic,
                   legendre)
from .magnetics import (annihilator_basis, dual_norm, mane_certificate,
                        mane_critical_value)
from .oracles import so3_magnetic_closed_form

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_NO_CONVERGENCE = 4
EXIT_NUMERICAL = 5


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_report(out_dir: Path, name: str, report: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2)
    (out_dir / name).write_text(text + "\n")


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _max_workers() -> int:
    raw = os.environ.get("MAGFLOW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _require_system(cfg):
    if cfg.system is None:
        raise ConfigError("this command needs 'inertia' and/or 'alpha'")
    return cfg.system


def cmd_mane(cfg, args, out_dir: Path) -> int:
    sys_ = _require_system(cfg)
    c, beta = mane_critical_value(sys_)
    ann = annihilator_basis(sys_.algebra)
    report = {
        "group": sys_.algebra.name,
        "critical_value": c,
        "optimal_primitive_shift": beta,
        "dual_norm_bound": 0.5 * dual_norm(sys_.A, sys_.alpha) ** 2,
        "annihilator_dim": int(ann.shape[1]),
        "stationarity_certificate": mane_certificate(sys_, beta),
    }
    _write_report(out_dir, "mane.json", report)
    _say(args, f"c = {c!r} (annihilator dim {ann.shape[1]})")
    return EXIT_OK


def cmd_flow(cfg, args, out_dir: Path) -> int:
    sys_ = _require_system(cfg)
    if not cfg.flow:
        raise ConfigError("flow command needs a 'flow' block")
    block = cfg.flow
    u0 = np.asarray(block["u0"], dtype=float)
    T = float(block["T"])
    dt = float(block["dt"])
    tolerance = float(block.get("tolerance", 1e-8))
    traj = integrate_magnetic(sys_, u0, T=T, dt=dt)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out_dir / "trajectory.csv")
    (out_dir / "trajectory.json").write_text(traj.to_json())
    report = {
        "group": sys_.algebra.name,
        "T": T, "dt": dt,
        "energy_initial": float(traj.energies[0]),
        "energy_drift": traj.energy_drift,
        "tolerance": tolerance,
    }
    if args.dual:
        ham = integrate_hamiltonian(
            sys_, PhasePoint(al.identity(sys_.algebra), legendre(sys_, u0)),
            T=T, dt=dt)
        report["conjugacy_gap"] = float(
            np.max(np.abs(traj.velocities - ham.velocities)))
    _write_report(out_dir, "flow.json", report)
    _say(args, f"drift = {traj.energy_drift:.3e} (tolerance {tolerance:g})")
    if args.dual:
        _say(args, f"conjugacy gap = {report['conjugacy_gap']:.3e}")
    return EXIT_OK if traj.energy_drift <= tolerance else EXIT_NUMERICAL


def cmd_connect(cfg, args, out_dir: Path) -> int:
    sys_ = _require_system(cfg)
    if not cfg.connect:
        raise ConfigError("connect command needs a 'connect' block")
    block = cfg.connect
    x = group_point_from_spec(block["x"], sys_.algebra)
    y = group_point_from_spec(block["y"], sys_.algebra)
    c, _ = mane_critical_value(sys_)
    kappa = cfg.resolve_kappa(c)
    opts = ConnectOptions(
        n_steps=int(block.get("N_steps", 64)),
        n_starts=int(block.get("seeds", 8)),
        seed=cfg.seed if args.seed is None else args.seed)
    from .finsler import connect_at_energy
    traj, report = connect_at_energy(sys_, kappa, x, y, opts=opts)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out_dir / "geodesic.csv")
    (out_dir / "geodesic.json").write_text(traj.to_json())
    full = {"group": sys_.algebra.name, "kappa": kappa,
            "critical_value": c, **report}
    _write_report(out_dir, "connect.json", full)
    _say(args, f"endpoint error = {report['endpoint_error']:.3e}, "
               f"residual = {report['residual']:.3e}")
    ok = (report["endpoint_error"] <= 1e-6 and report["residual"] <= 1e-4)
    return EXIT_OK if ok else EXIT_NO_CONVERGENCE


def cmd_epdiff(cfg, args, out_dir: Path) -> int:
    if not cfg.epdiff:
        raise ConfigError("epdiff command needs an 'epdiff' block")
    block = cfg.epdiff
    n = int(block.get("N", 32))
    grid = 4 * n
    u0 = field_from_spec(block["u0"], n, grid)
    a = field_from_spec(block.get("a", {"kind": "zero"}), n, grid)
    A = ep.SobolevInertia(float(block.get("s", 1.0)))
    T = float(block["T"])
    dt = float(block["dt"])
    dealias = bool(block.get("dealias", True))
    traj = ep.integrate_epdiff(u0, A, a, T=T, dt=dt, dealias=dealias,
                               sample_every=max(1, int(round(T / dt)) // 200))
    out_dir.mkdir(parents=True, exist_ok=True)
    traj.energy_to_csv(out_dir / "energy.csv")
    traj.snapshots_to_csv(out_dir / "snapshots.csv")
    report = {"modes": n, "s": A.s, "T": T, "dt": dt, "dealias": dealias,
              "energy_initial": float(traj.energies[0]),
              "energy_drift": traj.energy_drift}
    _write_report(out_dir, "epdiff.json", report)
    _say(args, f"energy drift = {traj.energy_drift:.3e}")
    return EXIT_OK


def cmd_check(args, out_dir: Path) -> int:
    try:
        results = checks.run_suite(args.suite, max_workers=_max_workers())
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_CONFIG
    report = {}
    all_pass = True
    for res in results:
        _say(args, res.summary())
        report[res.name] = {"passed": res.passed, "runtime": res.runtime,
                            "details": _jsonable(res.details)}
        all_pass = all_pass and res.passed
    _write_report(out_dir, f"check_{args.suite}.json", report)
    return EXIT_OK if all_pass else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magflow",
        description="Right-invariant magnetic geodesic flows on Lie groups")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to the JSON experiment config")
        p.add_argument("--dual", action="store_true",
                       help="also run the momentum-side integrator and "
                            "report the conjugacy gap")
        p.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=None,
                       help="random seed (overrides the config)")
        p.add_argument("--quiet", action="store_true")

    for name in ("mane", "flow", "connect", "epdiff"):
        common(sub.add_parser(name))
    check_p = sub.add_parser("check")
    check_p.add_argument("suite", nargs="?", default="all",
                         help=f"suite tag, one of {sorted(checks.SUITES)}")
    common(check_p, config_required=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        out_dir = Path(args.out or ".")
        return cmd_check(args, out_dir)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out or cfg.output_dir)
    dispatch = {"mane": cmd_mane, "flow": cmd_flow,
                "connect": cmd_connect, "epdiff": cmd_epdiff}
    try:
        return dispatch[args.command](cfg, args, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SubcriticalEnergyError as exc:
        print(f"subcritical energy requested: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ep.CFLError, ep.BlowUpError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
