"""Command-line interface for mhdlayer."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from . import __version__
from .analytic_norms import seminorms
from .config import InternalConfig, RunConfig, load_config
from .exceptions import ConfigError, LabError
from .field_core import Field, load_snapshot
from .lifespan import run_experiment, sweep
from .shear import ShearDatumFactory, shear_trace, verification_nodes, verify_H
from .utils import build_manifest, write_manifest
from .verification import run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3


def cmd_shear(cfg: RunConfig, args: argparse.Namespace) -> int:
    """Check the decay hypothesis of the configured shear datum."""
    datum = ShearDatumFactory.create(cfg.physics.datum, cfg.physics.u_bar)
    t0, t1 = InternalConfig.shear_window
    y = verification_nodes(t0, t1, InternalConfig.shear_resolution)
    report = verify_H(shear_trace(datum, t0, t1, InternalConfig.shear_samples, y), cfg.norms.alpha)

    out = Path(cfg.io.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.to_frame().to_csv(out / "shear_samples.csv", index=False)
    summary = dict(report.summary(), datum=cfg.physics.datum, u_bar=cfg.physics.u_bar)
    (out / "shear_summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    write_manifest(out / InternalConfig.manifest_name, build_manifest(cfg, "shear"))

    slopes = ", ".join(f"{k}={v:.4f}" for k, v in report.slopes().items())
    print(f"✅ Shear decay slopes: {slopes}; C_H={report.C_H:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args: argparse.Namespace) -> int:
    """Run one lifespan cell, writing trace, record, checkpoints and manifest."""
    out = Path(cfg.io.out_dir)
    if not out.exists():
        logger.info(f"Creating output directory {out}")
    record = run_experiment(
        cfg, epsilon=args.epsilon, b_bar=args.b_bar, out_dir=out, restart=args.restart
    )
    manifest = build_manifest(
        cfg, "simulate", {"record": record.extract_data(), "restart": args.restart}
    )
    write_manifest(out / InternalConfig.manifest_name, manifest)
    print(record.extract_markdown())
    print(
        f"✅ eps={record.epsilon:g}, b_bar={record.b_bar:g}: {record.end_reason} "
        f"at T={record.T_end:.6g}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args: argparse.Namespace) -> int:
    """Run all (epsilon, b_bar) cells and fit the lifespan exponent."""
    out = Path(cfg.io.out_dir)
    result = sweep(cfg, out_dir=out / "cells", show_progress=not args.quiet)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep_summary.csv").write_text(result.extract_csv(), encoding="utf-8")
    (out / "sweep.md").write_text(result.extract_markdown(), encoding="utf-8")
    if result.stabilization is not None:
        result.stabilization.to_csv(out / "stabilization.csv")
    manifest = build_manifest(cfg, "sweep", {"sweep": result.extract_data()})
    write_manifest(out / InternalConfig.manifest_name, manifest)

    print(result.extract_markdown())
    if all(r.end_reason == "failed" for r in result.records):
        print("❌ Every sweep cell failed", file=sys.stderr)
        return EXIT_RUNTIME
    for b_bar, fit in sorted(result.fits.items()):
        print(f"✅ b_bar={b_bar:g}: lam_fit={fit.lam_fit:.6f}", file=sys.stderr)
    for b_bar, err in sorted(result.fit_errors.items()):
        print(f"❌ b_bar={b_bar:g}: degenerate fit ({err})", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args: argparse.Namespace) -> int:
    """Run the property suites and write a pass/fail JSON report."""
    report = run_verification(cfg, args.suite)
    out = Path(cfg.io.out_dir)
    report.write(out / "verify_report.json")
    write_manifest(
        out / InternalConfig.manifest_name,
        build_manifest(cfg, "verify", {"passed": report.passed}),
    )
    for suite in report.suites:
        mark = "✅" if suite.passed else "❌"
        print(f"{mark} {suite.name}: worst={suite.worst:.6g}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_norms(cfg: RunConfig, args: argparse.Namespace) -> int:
    """Dump the semi-norms of every field stored in a snapshot or checkpoint."""
    grid, arrays, metadata = load_snapshot(args.snapshot)
    t = float(metadata.get("t", 0.0)) if args.t is None else args.t
    tau = cfg.norms.tau0 if args.tau is None else args.tau
    alpha = cfg.norms.alpha if args.alpha is None else args.alpha
    names = args.field or [n for n in arrays if not n.startswith(("history_", "extra__"))]

    frames = []
    for name in names:
        if name not in arrays:
            raise ConfigError(f"field {name!r} not found in {args.snapshot}")
        bundle = seminorms(Field(grid, arrays[name]), tau, alpha, t, cfg.norms.m_max)
        frames.append(bundle.to_frame().assign(field=name))
    table = pd.concat(frames, ignore_index=True)

    out = Path(cfg.io.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "norms.csv", index=False)
    write_manifest(
        out / InternalConfig.manifest_name,
        build_manifest(cfg, "norms", {"snapshot": str(args.snapshot)}),
    )
    print(table.to_csv(index=False))
    return EXIT_OK


COMMANDS = {
    "shear": cmd_shear,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "norms": cmd_norms,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (defaults when omitted)")
    common.add_argument("--seed", type=int, help="Override io.seed")
    common.add_argument("--jobs", type=int, help="Override io.jobs")
    common.add_argument("--out", help="Override io.out_dir")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(
        prog="mhdlayer",
        description="Numerical lab for 2D MHD boundary layers around a shear flow",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Check the decay of the shear flow
  mhdlayer shear --config run.json

  # One lifespan run, resumable from its checkpoints
  mhdlayer simulate --config run.json --out runs/eps0.1
  mhdlayer simulate --config run.json --restart runs/eps0.1/checkpoints/step_00001000.npz

  # Epsilon x b_bar sweep on 4 processes
  mhdlayer sweep --config run.json --jobs 4

  # Exercise the fit path only
  mhdlayer sweep --synthetic-exponent 1.7

  # Property suites (exit code 3 on failure)
  mhdlayer verify --seed 7

  # Semi-norms of a stored snapshot
  mhdlayer norms runs/eps0.1/checkpoints/step_00001000.npz --tau 0.25
        """,
    )
    parser.add_argument("--version", action="version", version=f"mhdlayer v{__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("shear", parents=[common], help="Verify the shear decay hypothesis")

    simulate = sub.add_parser("simulate", parents=[common], help="Run one lifespan cell")
    simulate.add_argument("--epsilon", type=float, help="Perturbation size")
    simulate.add_argument("--b-bar", dest="b_bar", type=float, help="Tangential magnetic field")
    simulate.add_argument("--restart", metavar="CHECKPOINT", help="Resume from a checkpoint")

    sweep_parser = sub.add_parser("sweep", parents=[common], help="Run an epsilon sweep")
    sweep_parser.add_argument(
        "--synthetic-exponent",
        type=float,
        help="Fit synthetic lifespans eps^-lam instead of running the solver",
    )
    sweep_parser.add_argument("--quiet", action="store_true", help="Hide the progress bar")

    verify = sub.add_parser("verify", parents=[common], help="Run the property suites")
    verify.add_argument(
        "--suite", action="append", help="Run only this suite (repeatable)"
    )

    norms = sub.add_parser("norms", parents=[common], help="Dump semi-norms of a snapshot")
    norms.add_argument("snapshot", help="Snapshot or checkpoint (.npz)")
    norms.add_argument("--tau", type=float, help="Radius (default norms.tau0)")
    norms.add_argument("--alpha", type=float, help="Weight exponent (default norms.alpha)")
    norms.add_argument("--t", type=float, help="Time of the weight (default: stored t)")
    norms.add_argument("--field", action="append", help="Field name (repeatable)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI function."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed,
            jobs=args.jobs,
            out=args.out,
            synthetic_exponent=getattr(args, "synthetic_exponent", None),
        )
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except LabError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.debug("Unexpected failure", exc_info=True)
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
