"""``crosslab`` command line.

Exit codes: 0 all thresholds met, 1 a threshold failed, 2 invalid config,
3 computation error.  Failures write ``error.json`` to the output directory
(when one is given) and print the same record to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import config as cfg
from . import io
from .errors import ConfigError, CrosslabError
from .pipelines import run_envelope, run_extremal, run_verify
from .suite import run_suite

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3


COMMANDS = {
    "extremal": "solve for the relative extremal function of A in Omega",
    "envelope": "build the envelope of a cross and count its components",
    "verify": "fit, extend and check a function given on a cross",
    "suite": "run the acceptance checks and print a pass/fail table",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crosslab", description="Extremal functions, envelopes and "
                                "separately holomorphic extension on grids.", epilog=__doc__.split("\n\n")[1])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name, summary in COMMANDS.items():
        s = sub.add_parser(name, help=summary, description=summary)
        s.add_argument("--config", type=Path, required=name != "suite", help="JSON config file" if name != "suite" else "unused; the suite builds its own configs")
        s.add_argument("--out", type=Path, help="output directory")
        s.add_argument("--seed", type=int, help="override the config seed")
        s.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker threads for Monte Carlo (default: CPU count)")
        s.add_argument("--tol", type=float, help="override the solver tolerance")
        if name == "extremal":
            s.add_argument("--max-iter", type=int, help="iteration cap for the solver")
            s.add_argument("--relax", type=float, help="SOR relaxation factor")
    return p


def _error_record(exc: Exception, code: str, partial: dict) -> dict:
    record = {"error": code, "message": str(exc)}
    for attr in ("residual", "conditioning"):
        if getattr(exc, attr, None) is not None:
            record[attr] = getattr(exc, attr)
    if partial:
        record["partial"] = partial
    return record


def _print_table(report: dict) -> None:
    for r in report["criteria"]:
        print(f"{r['id']:>2}  {'PASS' if r['passed'] else 'FAIL'}  {r['name']}")
    print(f"    {'PASS' if report['passed'] else 'FAIL'}  all")


def _run(args, partial: dict) -> int:
    if args.command == "suite":
        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            report = run_suite(7 if args.seed is None else args.seed, executor=pool)
        _print_table(report)
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            io.write_json(report, args.out / "suite.json")
        return EXIT_OK if report["passed"] else EXIT_FAILED

    doc = cfg.load(args.config, args.command)
    if args.command == "extremal":
        solver = dict(doc.get("solver", {}))
        if args.max_iter is not None:
            solver["max_iter"] = args.max_iter
        if args.relax is not None:
            solver["relaxation"] = args.relax
        if solver:
            doc = cfg.validate({**doc, "solver": solver}, "extremal")
        report, ok = run_extremal(doc, args.out, args.tol, partial)
    elif args.command == "envelope":
        report, ok = run_envelope(doc, args.out, args.tol, partial)
    else:
        report, ok = run_verify(doc, args.out, args.seed, args.tol, partial)
    sys.stdout.write(io.dumps(report))
    return EXIT_OK if ok else EXIT_FAILED


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    partial: dict = {}
    try:
        return _run(args, partial)
    except ConfigError as exc:
        record, code = _error_record(exc, exc.code, partial), EXIT_CONFIG
    except CrosslabError as exc:
        record, code = _error_record(exc, exc.code, partial), EXIT_COMPUTE
    except (ValueError, MemoryError) as exc:
        record, code = _error_record(exc, "invalid_input", partial), EXIT_COMPUTE
    text = io.dumps(record)
    sys.stderr.write(text)
    if getattr(args, "out", None) is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "error.json").write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
