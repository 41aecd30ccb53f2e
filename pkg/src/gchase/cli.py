"""Command-line entry point: ``gchase check`` and ``gchase run``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .chase import DEFAULT_MAX_STEPS, Status, chase
from .core import ChaseError
from .fileio import parse_problem, render_result, write_log
from .termination import ALL_CRITERIA, CONSTRAINTS_OK, Criterion, run_checks, validate_constraints

EXIT_OK = 0
EXIT_CONFLICT = 2
EXIT_STEP_LIMIT = 3
EXIT_CHECKS_FAILED = 4
EXIT_INVALID = 5

_STATUS_EXIT = {
    Status.FIXPOINT: EXIT_OK,
    Status.FAILED_BOTTOM: EXIT_CONFLICT,
    Status.EMPTY_QUERY: EXIT_CONFLICT,
    Status.STEP_LIMIT: EXIT_STEP_LIMIT,
}


def _criteria(text: str) -> list[Criterion]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise argparse.ArgumentTypeError("at least one criterion is required")
    try:
        return [Criterion(name) for name in names]
    except ValueError:
        valid = ",".join(c.value for c in ALL_CRITERIA)
        raise argparse.ArgumentTypeError(f"criteria must be drawn from {valid}") from None


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gchase", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="validate dependencies and run termination checks")
    run = sub.add_parser("run", help="check, then chase the instance or query")
    for p in (check, run):
        p.add_argument("input", type=Path, help="problem file")
        p.add_argument(
            "--criteria",
            type=_criteria,
            default=list(ALL_CRITERIA),
            help="comma list of rich,weak,safe,rewriting,rewriting-egd (default: all)",
        )
    run.add_argument("--max-steps", type=_positive, default=DEFAULT_MAX_STEPS)
    run.add_argument("--force", action="store_true", help="chase even if a check fails")
    run.add_argument("-o", dest="out", type=Path, help="write the result here instead of stdout")
    run.add_argument("--log", type=Path, help="write the step log here")
    return parser


def _load(path: Path):
    try:
        problem = parse_problem(path.read_bytes())
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None
    except (ChaseError, UnicodeDecodeError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None
    diagnostics = validate_constraints(problem.dependencies, problem.schema)
    for d in diagnostics:
        print(f"error: {path}: {d.render()}", file=sys.stderr)
    return None if diagnostics else problem


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    problem = _load(args.input)
    if problem is None:
        return EXIT_INVALID
    results = run_checks(problem.dependencies, args.criteria)
    lines = [text for _, _, text in results] + [CONSTRAINTS_OK]
    passed = all(ok for _, ok, _ in results)

    if args.command == "check":
        sys.stdout.write("\n".join(lines) + "\n")
        return EXIT_OK if passed else EXIT_CHECKS_FAILED

    if not passed:
        for _, ok, text in results:
            if not ok:
                print(text, file=sys.stderr)
        if not args.force:
            print("error: termination checks failed; rerun with --force to chase anyway", file=sys.stderr)
            return EXIT_CHECKS_FAILED
        print("warning: chasing despite failed termination checks", file=sys.stderr)

    try:
        outcome = chase(problem.dependencies, problem.object, args.max_steps, head=problem.query_head)
    except ChaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = render_result(outcome)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.log is not None:
        args.log.write_text(write_log(outcome.log, lines), encoding="utf-8")
    return _STATUS_EXIT[outcome.status]


def main() -> None:
    sys.exit(run_cli())
