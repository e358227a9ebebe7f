"""Command line entry point: one subcommand per experiment kind.

Exit codes: 0 success, 1 validation error, 2 resource cap, 3 failed verification.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import EXPERIMENTS, RULE_NAMES, StrategyConfig, validate_config
from .errors import ConfigError, QCausetError
from .experiments import WORKERS_ENV, run_experiment
from .proposals import KINDS


def _range_or_list(text: str) -> tuple[int, ...]:
    """``4``, ``3..5`` or ``3,4,5``."""
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split(".."))
            return tuple(range(min(lo, hi), max(lo, hi) + 1))
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cardinality spec {text!r}") from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _kinds(text: str) -> tuple[str, ...]:
    kinds = tuple(k.strip() for k in text.split(","))
    for k in kinds:
        if k not in KINDS:
            raise argparse.ArgumentTypeError(f"unknown strategy {k!r}; choose from {KINDS}")
    return kinds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcauset",
        description="Quantum-enhanced and classical MCMC over small causal sets.",
        epilog=f"Set {WORKERS_ENV} to run independent jobs on a process pool.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="SUBCOMMAND")
    helps = {
        "enumerate": "list every causal set of the given cardinalities",
        "action": "abundances, smeared action and truncated-Hamiltonian value per set",
        "sample": "run Markov chains and write their traces",
        "spectral-gap": "exact spectral gaps of the transition matrices",
        "sweep-N": "gaps against cardinality with exponential fits",
        "sweep-T": "gaps against temperature at fixed cardinality",
        "exactbd-verify": "check the ancilla encoding of the exact 2d action",
    }
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("-c", "--config", type=Path, help="YAML config file; flags override it")
        p.add_argument("-n", "--n", dest="cardinalities", type=_range_or_list,
                       help="cardinality: 4, 3..5 or 3,4,5")
        p.add_argument("-o", "--output", help="CSV path (default: stdout)")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-cardinality", type=int)
        if name in ("action", "sample", "spectral-gap", "sweep-N", "sweep-T"):
            p.add_argument("--epsilon", type=float)
            p.add_argument("--dimension", type=int)
        if name in ("sample", "spectral-gap", "sweep-N", "sweep-T"):
            p.add_argument("--rule", choices=RULE_NAMES)
            p.add_argument("-T", "--temperature", dest="temperatures", type=_floats,
                           help="temperature or comma-separated list")
            p.add_argument("--strategies", type=_kinds,
                           help=f"comma-separated subset of {','.join(KINDS)}")
            p.add_argument("--samples", type=int, help="quantum parameter samples per strategy")
        if name == "sample":
            p.add_argument("--steps", type=int)
            p.add_argument("--burn-in", type=int)
            p.add_argument("--thin", type=int)
            p.add_argument("--initial", help="starting set, e.g. 3:000")
        if name == "action":
            p.add_argument("--input", help="file with one serialized set per line")
        if name == "exactbd-verify":
            p.add_argument("--lambda", dest="lam", type=float)
    return parser


def load_config(args: argparse.Namespace):
    text = args.config.read_text() if args.config else ""
    base = validate_config(text, args.experiment, seed=0) if text else None
    over = {}
    for key in ("cardinalities", "output", "seed", "max_cardinality", "epsilon", "dimension",
                "rule", "temperatures", "steps", "burn_in", "thin", "initial", "input", "lam"):
        value = getattr(args, key, None)
        if value is not None:
            over[key] = value
    strategies = base.strategies if base else None
    kinds = getattr(args, "strategies", None)
    if kinds is not None:
        strategies = tuple(StrategyConfig(kind=k) for k in kinds)
    samples = getattr(args, "samples", None)
    if samples is not None:
        if samples < 1:
            raise ConfigError("--samples must be positive")
        if strategies is None:
            strategies = validate_config("", args.experiment, seed=0).strategies
        strategies = tuple(replace(s, samples=samples) for s in strategies)
    over["strategies"] = strategies
    return validate_config(text, args.experiment, **over)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        result = run_experiment(cfg)
    except QCausetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not cfg.output:
        sys.stdout.write(result.csv(cfg))
    for line in result.messages:
        print(line, file=sys.stderr)
    return result.status


if __name__ == "__main__":
    raise SystemExit(main())
