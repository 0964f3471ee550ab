"""
Command-line front end: run circuits, verify presets, analyze chains, evaluate continuous models

Exit codes: 0 all checks passed, 1 a violation was found, 2 usage error.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from .utils.base import CircuitSyntaxError, SimulationError
from .utils.circuit import compile_and_run, emit_report, parse_circuit, report_csv, report_json
from .utils.continuous import continuous_csv_rows, rows_to_csv
from .utils.presets import PRESETS, parse_chain_file, render_table, run_preset, spectrum_reports

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

QUADRATURE_TOL = 1e-6
MONTE_CARLO_SIGMAS = 3.0


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _syntax_error(path: str, e: CircuitSyntaxError) -> int:
    print(f"{path}:{e.line}:{e.column}: {e.message}", file=sys.stderr)
    return EXIT_USAGE


def cmd_run(args: argparse.Namespace) -> int:
    try:
        program = parse_circuit(_read(args.circuit))
        report = compile_and_run(program, args.seed)
    except OSError as e:
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE
    except CircuitSyntaxError as e:
        return _syntax_error(args.circuit, e)
    except SimulationError as e:
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_VIOLATION

    if args.out:
        print(emit_report(report, args.format, args.out))
    else:
        sys.stdout.write(report_csv(report) if args.format == "csv" else report_json(report))
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_preset(args.preset, args.seed)
    print(render_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


def cmd_spectrum(args: argparse.Namespace) -> int:
    try:
        steps = parse_chain_file(_read(args.chain))
    except OSError as e:
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE
    except CircuitSyntaxError as e:
        return _syntax_error(args.chain, e)
    print(json.dumps(spectrum_reports(steps), indent=2, sort_keys=True))
    return EXIT_OK


def _continuous_violations(kind: str, rows, bins: int) -> int:
    violations = 0
    for *_, value, stderr, exact, _method in rows:
        if kind == "quadrature":
            violations += abs(value - exact) > QUADRATURE_TOL
        elif kind == "montecarlo":
            violations += abs(value - exact) > MONTE_CARLO_SIGMAS * stderr
        elif kind == "circle":
            violations += abs(value - exact) > 1.0 / bins
    return violations


def cmd_continuous(args: argparse.Namespace) -> int:
    try:
        rho = [float(v) for v in args.rho.split(",")]
        rows = continuous_csv_rows(
            args.kind, directions=args.directions, rho=rho, n_samples=args.samples, seed=args.seed,
            shards=args.shards, psi=args.psi, r=args.r, bins=args.bins,
        )
    except ValueError as e:
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE if not isinstance(e, SimulationError) else EXIT_VIOLATION

    content = rows_to_csv(rows)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.kind}.csv")
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
        print(path)
    else:
        sys.stdout.write(content)

    violations = _continuous_violations(args.kind, rows, args.bins)
    if violations:
        logger.warning(f"{violations} of {len(rows)} directions outside tolerance")
    return EXIT_VIOLATION if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ising-qubits", description="Quantum bits from classical Ising spins")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a circuit file")
    run.add_argument("circuit")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="directory for report.json / report.csv")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run a verification preset")
    verify.add_argument("preset", choices=tuple(PRESETS))
    verify.add_argument("--seed", type=int, default=None)
    verify.set_defaults(func=cmd_verify)

    spectrum = sub.add_parser("spectrum", help="spectra of the steps in a chain file")
    spectrum.add_argument("chain")
    spectrum.set_defaults(func=cmd_spectrum)

    continuous = sub.add_parser("continuous", help="continuous-variable qubit experiments")
    continuous.add_argument("kind", choices=("quadrature", "montecarlo", "gaussian", "circle"))
    continuous.add_argument("--directions", type=int, default=20)
    continuous.add_argument("--samples", type=int, default=100_000)
    continuous.add_argument("--shards", type=int, default=1)
    continuous.add_argument("--seed", type=int, default=None)
    continuous.add_argument("--rho", default="0,0,1", help="Bloch vector of the rotation-invariant model")
    continuous.add_argument("--psi", type=float, default=0.3)
    continuous.add_argument("--r", type=float, default=1.0)
    continuous.add_argument("--bins", type=int, default=256)
    continuous.add_argument("--out", default=None)
    continuous.set_defaults(func=cmd_continuous)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
