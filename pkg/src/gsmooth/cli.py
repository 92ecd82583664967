"""Command-line interface: run, repro, check, constants."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .core import SmoothnessSpec, derive_det_constants, derive_stoch_constants
from .harness import ExperimentConfig, emit_csv, run_checks, run_experiment, write_manifest
from .optimizers import theoretical_gamma_det
from .presets import PRESET_NAMES, preset


def _add_common_run_args(sub):
    sub.add_argument("--out", default="results", help="output directory")
    sub.add_argument(
        "--seeds",
        default=None,
        help="comma-separated seed list overriding the config",
    )
    sub.add_argument("--threads", type=int, default=None, help="worker pool cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsmooth",
        description=(
            "Benchmarks and property checks for normalized gradient methods "
            "on generalized-smooth nonconvex problems."
        ),
    )
    parser.add_argument("--version", action="version", version=f"gsmooth {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run an experiment from a JSON config")
    run_p.add_argument("--config", required=True, help="path to a config JSON file")
    _add_common_run_args(run_p)

    repro_p = subs.add_parser("repro", help="run a builtin experiment preset")
    repro_p.add_argument("preset", choices=PRESET_NAMES)
    repro_p.add_argument("--desk", action="store_true", help="desk-scale variant")
    _add_common_run_args(repro_p)

    check_p = subs.add_parser("check", help="run a property-check suite")
    check_p.add_argument(
        "suite",
        choices=[
            "membership",
            "descent",
            "expected",
            "noise",
            "young",
            "moment",
            "divergence",
            "spider-martingale",
        ],
    )
    check_p.add_argument("--target", default=None, help="suite-specific target")
    check_p.add_argument("--seed", type=int, default=0)

    const_p = subs.add_parser("constants", help="print derived class constants")
    const_p.add_argument("--alpha", type=float, required=True)
    const_p.add_argument("--l0", type=float, required=True)
    const_p.add_argument("--l1", type=float, required=True)
    const_p.add_argument(
        "--stoch", action="store_true", help="also print mean-square constants"
    )
    const_p.add_argument("--eps", type=float, default=None, help="target accuracy")
    const_p.add_argument("--beta", type=float, default=None, help="normalization power")
    return parser


def _cmd_run(config: ExperimentConfig, args) -> int:
    if args.seeds:
        seeds = tuple(int(s) for s in args.seeds.split(","))
        config = ExperimentConfig.from_dict({**config.to_dict(), "seeds": list(seeds)})
    os.makedirs(args.out, exist_ok=True)
    start = time.monotonic()
    rows = run_experiment(config, threads=args.threads)
    path = os.path.join(args.out, f"{config.experiment}.csv")
    emit_csv(rows, path)
    manifest = write_manifest(config, args.out, time.monotonic() - start)
    print(f"wrote {path} ({len(rows)} rows) and {manifest}")
    return 0


def _cmd_constants(args) -> int:
    spec = SmoothnessSpec(alpha=args.alpha, l0=args.l0, l1=args.l1)
    print(f"alpha={spec.alpha:g}  L0={spec.l0:g}  L1={spec.l1:g}")
    if 0.0 < spec.alpha < 1.0:
        k = derive_det_constants(spec)
        print(f"K0={k.k0:.9g}  K1={k.k1:.9g}  K2={k.k2:.9g}")
    else:
        print("K constants: undefined at alpha in {0, 1} (exponential/plain path)")
    if args.stoch:
        if 0.0 < spec.alpha < 1.0:
            kb = derive_stoch_constants(spec)
            print(f"Kbar0={kb.kbar0:.9g}  Kbar1={kb.kbar1:.9g}  Kbar2={kb.kbar2:.9g}")
        else:
            print("Kbar constants: undefined at alpha in {0, 1}")
    if args.eps is not None:
        beta = args.beta if args.beta is not None else max(spec.alpha, 0.0)
        plan = theoretical_gamma_det(spec, args.eps, beta)
        print(
            f"eps={args.eps:g}  beta={beta:g}  gamma={plan.gamma:.9g}  "
            f"T={plan.iterations}"
        )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        with open(args.config, encoding="utf-8") as fh:
            config = ExperimentConfig.from_dict(json.load(fh))
        return _cmd_run(config, args)
    if args.command == "repro":
        return _cmd_run(preset(args.preset, desk=args.desk), args)
    if args.command == "check":
        report = run_checks(args.suite, target=args.target, seed=args.seed)
        print(json.dumps(report, indent=2))
        return 0 if report.get("passed") else 1
    if args.command == "constants":
        return _cmd_constants(args)
    raise AssertionError(f"unhandled command {args.command}")  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
