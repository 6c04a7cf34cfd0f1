"""Command-line interface: config ingestion, command dispatch, deterministic
artifact emission (CSV trajectories, JSON reports) and the seeded property
suite.  Exit codes: 0 all thresholds met, 1 threshold violation, 2 input
error."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import algebroid as alg
from . import hj as hjmod
from . import library as lib
from . import mechanics as mech
from . import poisson as poi
from . import snake as snk
from .expr import ExprError
from .mechanics import VelPoint
from .poisson import PhasePoint
from .properties import property_suite
from .trajectory import BlowUpError, emit_csv, format_float

__all__ = ["main", "run"]


def _floats(text):
    return [float(v) for v in text.split(",") if v != ""]


def _say(args, msg):
    if not args.quiet:
        print(msg)


def _write_json(args, name, obj):
    path = os.path.join(args.out, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def _load_spec(path):
    spec = alg.load_spec(path)
    alg.validate(spec)
    return spec


def _cmd_validate(args):
    _load_spec(args.spec)
    _say(args, f"ok: {args.spec}")
    return 0


def _cmd_hamilton(args):
    spec = _load_spec(args.spec)
    h = spec.phase_function(args.h)
    x0 = _floats(args.x0)
    xi0 = _floats(args.xi0)
    if len(x0) != spec.n or len(xi0) != spec.m:
        raise ValueError(f"need {spec.n} base and {spec.m} dual coordinates")
    traj = poi.integrate_hamilton(spec, h, PhasePoint.of(x0, xi0), args.t, args.step)
    path = os.path.join(args.out, "hamilton.csv")
    emit_csv(traj, path)
    _say(args, f"wrote {path} ({len(traj)} samples)")
    return 0


def _cmd_lagrange(args):
    spec = _load_spec(args.spec)
    if args.riemannian:
        L = mech.riemannian_lagrangian(spec)
    elif args.L:
        L = spec.lagrangian(args.L)
    else:
        raise ValueError("provide --L or --riemannian")
    x0 = _floats(args.x0)
    u0 = _floats(args.u0)
    if len(x0) != spec.n or len(u0) != spec.m:
        raise ValueError(f"need {spec.n} base and {spec.m} fiber coordinates")
    traj = mech.integrate_el(spec, L, VelPoint.of(x0, u0), args.t, args.step)
    path = os.path.join(args.out, "lagrange.csv")
    emit_csv(traj, path)
    _say(args, f"wrote {path} ({len(traj)} samples)")
    return 0


def _cmd_jacobi_report(args):
    spec = _load_spec(args.spec)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    worst = 0.0
    for _ in range(args.samples):
        s1 = lib.random_section(rng, spec)
        s2 = lib.random_section(rng, spec)
        s3 = lib.random_section(rng, spec)
        x = rng.uniform(-1, 1, spec.n)
        j = alg.jacobiator(spec, s1, s2, s3, x)
        worst = max(worst, float(np.max(np.abs(j))))
    report = {"samples": args.samples, "seed": args.seed, "max_jacobiator": worst}
    path = _write_json(args, "jacobi.json", report)
    _say(args, f"wrote {path}: max |J| = {format_float(worst)}")
    return 0


def _cmd_hj_check(args):
    spec = _load_spec(args.spec)
    h = spec.phase_function(args.h)
    omega = spec.dual_section(args.omega.split(";"))
    x0 = _floats(args.x0)
    rep = hjmod.hj_equivalence_check(spec, h, omega, x0, args.t, args.step)
    thresholds = {"closedness": 1e-8, "hj": 1e-8, "lift": 1e-5}
    ok = (
        rep.closedness_defect <= thresholds["closedness"]
        and rep.hj_defect <= thresholds["hj"]
        and rep.lift_deviation <= thresholds["lift"]
    )
    obj = rep.to_dict()
    obj["thresholds"] = thresholds
    obj["pass"] = ok
    path = _write_json(args, "hjcheck.json", obj)
    _say(args, f"{'PASS' if ok else 'FAIL'}: wrote {path}")
    return 0 if ok else 1


def _cmd_derivation_roundtrip(args):
    spec = _load_spec(args.spec)
    delta0, delta1 = alg.differential_from_spec(spec)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    worst = 0.0
    for _ in range(args.points):
        x = rng.uniform(-1, 1, spec.n)
        rho, c = alg.reconstruct_from_differential(delta0, delta1, x, spec.n, spec.m)
        worst = max(worst, float(np.max(np.abs(rho - spec.rho_at(x)))))
        ctab = spec.c_at(x)
        for (gam, a, b), v in c.items():
            worst = max(worst, abs(v - ctab[gam, a, b]))
    ok = worst <= 1e-10
    report = {
        "points": args.points,
        "seed": args.seed,
        "max_error": worst,
        "threshold": 1e-10,
        "pass": ok,
    }
    path = _write_json(args, "roundtrip.json", report)
    _say(args, f"{'PASS' if ok else 'FAIL'}: wrote {path}")
    return 0 if ok else 1


def _cmd_snake_charm(args):
    cfg, head = snk.load_snake(args.config)
    if head is None:
        raise ValueError("snake config has no head curve")
    traj = snk.charm(cfg, head, args.t, args.step)
    path = os.path.join(args.out, "charm.csv")
    emit_csv(traj, path)
    track = max(row[-2] for row in traj.rows)
    _say(args, f"wrote {path} (max tracking error {format_float(track)})")
    return 0


def _cmd_snake_extremal(args):
    sigma0 = _floats(args.sigma0)
    sigmadot0 = _floats(args.sigmadot0)
    xi0 = _floats(args.xi0)
    xidot0 = _floats(args.xidot0)
    d = len(sigma0)
    if len(xi0) != d * (d - 1) // 2 or len(xidot0) != d * (d - 1) // 2:
        raise ValueError(f"xi vectors must have length {d * (d - 1) // 2}")
    sigma, xi = snk.extremal_regular(sigma0, sigmadot0, xi0, xidot0, args.t)
    obj = {
        "t": args.t,
        "sigma": [float(v) for v in sigma],
        "xi": [float(v) for v in xi],
    }
    _say(args, json.dumps(obj, sort_keys=True))
    return 0


def _cmd_check_all(args):
    report = property_suite(args.seed)
    path = _write_json(args, "checkall.json", report)
    for entry in report["checks"]:
        _say(
            args,
            f"{'PASS' if entry['pass'] else 'FAIL'} {entry['name']}: "
            f"defect {format_float(entry['defect'])} "
            f"(threshold {format_float(entry['threshold'])})",
        )
    _say(args, f"wrote {path}")
    if not report["all_pass"]:
        failing = [c["name"] for c in report["checks"] if not c["pass"]]
        _say(args, "failing invariants: " + ", ".join(failing))
        return 1
    return 0


def _build_parser():
    p = argparse.ArgumentParser(prog="algmech")
    p.add_argument("--out", default=".", help="output directory for artifacts")
    p.add_argument("--quiet", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate")
    sp.add_argument("spec")
    sp.set_defaults(fn=_cmd_validate)

    sp = sub.add_parser("hamilton")
    sp.add_argument("spec")
    sp.add_argument("--h", required=True)
    sp.add_argument("--x0", required=True)
    sp.add_argument("--xi0", required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.set_defaults(fn=_cmd_hamilton)

    sp = sub.add_parser("lagrange")
    sp.add_argument("spec")
    sp.add_argument("--L")
    sp.add_argument("--riemannian", action="store_true")
    sp.add_argument("--x0", required=True)
    sp.add_argument("--u0", required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.set_defaults(fn=_cmd_lagrange)

    sp = sub.add_parser("jacobi-report")
    sp.add_argument("spec")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_jacobi_report)

    sp = sub.add_parser("hj-check")
    sp.add_argument("spec")
    sp.add_argument("--h", required=True)
    sp.add_argument("--omega", required=True, help="semicolon-separated components")
    sp.add_argument("--x0", required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.set_defaults(fn=_cmd_hj_check)

    sp = sub.add_parser("derivation-roundtrip")
    sp.add_argument("spec")
    sp.add_argument("--points", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_derivation_roundtrip)

    sp = sub.add_parser("snake-charm")
    sp.add_argument("config")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.set_defaults(fn=_cmd_snake_charm)

    sp = sub.add_parser("snake-extremal")
    sp.add_argument("--sigma0", required=True)
    sp.add_argument("--sigmadot0", required=True)
    sp.add_argument("--xi0", required=True)
    sp.add_argument("--xidot0", required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.set_defaults(fn=_cmd_snake_extremal)

    sp = sub.add_parser("check-all")
    sp.add_argument("--seed", type=int, default=42)
    sp.set_defaults(fn=_cmd_check_all)

    return p


def run(argv):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if hasattr(args, "t") and args.t <= 0:
            raise ValueError("--t must be positive")
        if hasattr(args, "step") and args.step <= 0:
            raise ValueError("--step must be positive")
        return args.fn(args)
    except (
        alg.SpecError,
        ExprError,
        snk.SnakeConfigError,
        ValueError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BlowUpError, snk.SingularConfigurationError, mech.SingularLagrangianError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))
