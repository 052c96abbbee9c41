"""Command line entry point: ``promut run|coverage|mutants|list-ops``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from .coverage import compare, exits_for_case, from_exits
from .engine import Budget, Engine
from .errors import BaselineRejected, EmptySuite, ParseError
from .harness import parse_suite
from .operators import ALL_OPERATORS, apply, enumerate_sites, select_operators
from .reader import parse_program
from .report import render_comparison, render_coverage, render_operator_matrix
from .runner import RunnerConfig, run_campaign
from .writer import pretty_print

EXIT_OK, EXIT_BASELINE, EXIT_USAGE, EXIT_BELOW_THRESHOLD = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _default_jobs() -> int:
    raw = os.environ.get("PROMUT_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _ops(text: str):
    try:
        ops = select_operators(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not ops:
        raise argparse.ArgumentTypeError("no operators selected")
    return ops


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--quiet", action="store_true", help="print nothing on success; rely on the exit code")
    common.add_argument("--seed", type=int, default=None, help="reserved; campaigns are deterministic")

    parser = argparse.ArgumentParser(prog="promut", description="Mutation testing for Prolog programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a mutation campaign")
    run.add_argument("program")
    run.add_argument("--tests", action="append", required=True, metavar="PATH")
    run.add_argument("--ops", type=_ops, default=ALL_OPERATORS, help="all, sensible, foolish or a comma list")
    run.add_argument("--timeout-constant-ms", type=float, default=1000.0)
    run.add_argument("--step-budget", type=_positive, default=1_000_000)
    run.add_argument("--jobs", type=_positive, default=_default_jobs())
    run.add_argument("--matrix", action="store_true", help="run every test on every mutant and show verdicts")
    run.add_argument("--min-score", type=float, default=0.0, help="fail (exit 3) below this score, 0..1")

    cov = sub.add_parser("coverage", parents=[common], help="sub-goal, clause and predicate coverage")
    cov.add_argument("program")
    cov.add_argument("--tests", action="append", required=True, metavar="PATH")
    cov.add_argument("--step-budget", type=_positive, default=1_000_000)
    cov.add_argument("--trace", metavar="PATH", help="write trace events as JSON lines")
    cov.add_argument("--compare", action="store_true", help="add a comparison row with the mutation score")

    mut = sub.add_parser("mutants", parents=[common], help="list or write mutants")
    mut.add_argument("program")
    mut.add_argument("--ops", type=_ops, default=ALL_OPERATORS)
    mut.add_argument("--emit-dir", metavar="DIR")

    sub.add_parser("list-ops", parents=[common], help="show the operator catalogue")
    return parser


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(args):
    program = parse_program(_read(args.program))
    cases = []
    for path in args.tests:
        cases.extend(parse_suite(_read(path)))
    return program, cases


def _out(args, text: str) -> None:
    if not args.quiet:
        sys.stdout.write(text)


def _cmd_run(args) -> int:
    program, cases = _load(args)
    config = RunnerConfig(
        ops=args.ops,
        timeout_constant_millis=args.timeout_constant_ms,
        step_budget=args.step_budget,
        jobs=args.jobs,
        fail_fast_per_mutant=not args.matrix,
    )
    report = run_campaign(program, cases, config)
    _out(args, render_operator_matrix(report, args.format, args.matrix).body)
    score = report.mutation_score
    if args.min_score > 0 and (score is None or score < args.min_score):
        return EXIT_BELOW_THRESHOLD
    return EXIT_OK


def _cmd_coverage(args) -> int:
    program, cases = _load(args)
    if not cases:
        raise EmptySuite()
    budget = Budget(args.step_budget)
    engine = Engine(program)
    exited: set = set()
    trace_file = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        for case in cases:
            if trace_file is None:
                exited |= exits_for_case(engine, case, budget)
                continue
            events = []
            exited |= exits_for_case(engine, case, budget, events.append)
            for event in events:
                trace_file.write(json.dumps({"test": case.name, **event.to_json()}) + "\n")
    finally:
        if trace_file is not None:
            trace_file.close()
    cov = from_exits(program, frozenset(exited))
    _out(args, render_coverage(cov, args.format).body)
    if args.compare:
        campaign = run_campaign(program, cases, RunnerConfig(step_budget=args.step_budget, jobs=_default_jobs()))
        row = compare(cov, campaign, program, Path(args.program).stem)
        _out(args, render_comparison([row], args.format).body)
    return EXIT_OK


def _cmd_mutants(args) -> int:
    program = parse_program(_read(args.program))
    sites = enumerate_sites(program, args.ops)
    manifest = []
    for site in sites:
        mutant = apply(program, site)
        name, arity = site.predicate
        entry = {
            "id": site.id,
            "operator": site.operator.cli_name,
            "predicate": f"{name}/{arity}",
            "clause": site.clause,
            "path": None if site.path is None else list(site.path),
            "diff": mutant.diff,
        }
        if args.emit_dir:
            filename = f"{site.id}_{site.operator.cli_name}.pl"
            entry["file"] = filename
            out_dir = Path(args.emit_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / filename).write_text(pretty_print(mutant.program), encoding="utf-8")
        manifest.append(entry)
    if args.emit_dir:
        path = Path(args.emit_dir) / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if args.format == "json":
        _out(args, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    else:
        lines = []
        for entry, site in zip(manifest, sites):
            lines.append(f"#{site.id} {site.describe()}")
            lines.extend("    " + line for line in entry["diff"].splitlines()[3:])
        _out(args, "\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK


def _cmd_list_ops(args) -> int:
    if args.format == "json":
        data = [{"operator": op.cli_name, "label": op.label, "sensible": op.sensible} for op in ALL_OPERATORS]
        _out(args, json.dumps(data, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"{op.cli_name} {'sensible' if op.sensible else 'foolish'}" for op in ALL_OPERATORS]
        _out(args, "\n".join(lines) + "\n")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "coverage": _cmd_coverage, "mutants": _cmd_mutants, "list-ops": _cmd_list_ops}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except BaselineRejected as exc:
        print(f"promut: {exc}", file=sys.stderr)
        return EXIT_BASELINE
    except (EmptySuite, ParseError, _UsageError) as exc:
        print(f"promut: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
