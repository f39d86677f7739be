"""Command-line entry point.

Subcommands:
  hybrid-pe run motivational [--noise] [--baselines] [--out DIR] [--config FILE]
  hybrid-pe run spacecraft [--controller pd|pid] [--out DIR] [--config FILE]
  hybrid-pe certify-pe --arc FILE --delta X [--shape N P]
  hybrid-pe bounds --config FILE

Config files are JSON objects overriding scenario defaults field by field.
Exit codes: 0 on pass, 2 when an envelope or run check is violated, 1 on
error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import BoundInputs, theorem1_constants
from .hybrid_time import read_arc_csv
from .pe_analysis import certify_hybrid_pe
from .scenarios import (MotivationalConfig, SpacecraftConfig, emit_report,
                        run_motivational, run_spacecraft)

PASS, FAIL, ERROR = 0, 2, 1


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _run_motivational(args) -> int:
    cfg = MotivationalConfig.from_dict(_load_config(args.config))
    report = run_motivational(cfg, with_baselines=args.baselines,
                              with_noise=args.noise)
    if args.out:
        files = emit_report(report, args.out)
        print(f"wrote {len(files)} files to {args.out}")
    ok = True
    for name, env in sorted(report.envelopes.items()):
        status = "pass" if env.passed else "FAIL"
        print(f"{name}: {status} (max violation {env.max_violation:.3e})")
        ok = ok and env.passed
    for key in sorted(report.scalars):
        print(f"{key} = {report.scalars[key]:.6g}")
    return PASS if ok else FAIL


def _run_spacecraft(args) -> int:
    cfg = SpacecraftConfig.from_dict(_load_config(args.config))
    controller = {"pd": "pd", "pid": "pid"}[args.controller]
    report = run_spacecraft(cfg, controller=controller)
    if args.out:
        files = emit_report(report, args.out)
        print(f"wrote {len(files)} files to {args.out}")
    for key in sorted(report.scalars):
        print(f"{key} = {report.scalars[key]:.6g}")
    ok = True
    if controller == "pd" and cfg.theta != 0.0:
        rel = abs(report.scalars["theta_hat_final"] - cfg.theta) / abs(cfg.theta)
        print(f"bias estimate relative error = {rel:.3e}")
        ok = rel < 0.01
    return PASS if ok else FAIL


def _certify(args) -> int:
    shape = tuple(args.shape) if args.shape else None
    arc = read_arc_csv(args.arc, value_shape=shape)
    cert = certify_hybrid_pe(arc, args.delta)
    print(cert.to_json())
    return PASS


def _bounds(args) -> int:
    raw = _load_config(args.config)
    inputs = BoundInputs(**raw)
    ledger = theorem1_constants(inputs)
    ledger.validate()
    print(ledger.to_json())
    return PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-pe",
        description="Hybrid-system parameter estimation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a case study")
    run_sub = run.add_subparsers(dest="scenario", required=True)

    motiv = run_sub.add_parser("motivational", help="sawtooth-reset example")
    motiv.add_argument("--noise", action="store_true",
                       help="add the sinusoidal measurement noise variant")
    motiv.add_argument("--baselines", action="store_true",
                       help="also run the flattened classical baselines")
    motiv.add_argument("--out", help="directory for the run report")
    motiv.add_argument("--config", help="JSON file overriding defaults")
    motiv.set_defaults(func=_run_motivational)

    sc = run_sub.add_parser("spacecraft", help="bias-torque case study")
    sc.add_argument("--controller", choices=("pd", "pid"), default="pd",
                    help="pd = feedforward from the estimator, pid = baseline")
    sc.add_argument("--out", help="directory for the run report")
    sc.add_argument("--config", help="JSON file overriding defaults")
    sc.set_defaults(func=_run_spacecraft)

    cert = sub.add_parser("certify-pe", help="certify excitation of an arc CSV")
    cert.add_argument("--arc", required=True, help="arc CSV file")
    cert.add_argument("--delta", type=float, required=True,
                      help="window length of the certificate")
    cert.add_argument("--shape", type=int, nargs=2, metavar=("N", "P"),
                      help="reshape flat samples to N x P regressor matrices")
    cert.set_defaults(func=_certify)

    bounds = sub.add_parser("bounds", help="evaluate the constant ledger")
    bounds.add_argument("--config", required=True,
                        help="JSON file with the chain inputs")
    bounds.set_defaults(func=_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TypeError, OSError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
