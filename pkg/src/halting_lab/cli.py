"""``hlab``: run, analyze, diagonal, demo and verify-corpus from the shell.

Exit codes
    run            0 halted, 2 trapped, 3 budget exhausted
    analyze        0 halts, 4 diverges, 5 unknown
    diagonal       0 report matches the expected result for the oracle, else 6
    demo           0 pass, 6 mismatch
    verify-corpus  0 all definite cases pass, 6 otherwise
    any            1 usage, file or parse error
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import cdf_demos, diagonal
from .analyzer import AnalysisLimits, Diverges, Halts, analyze
from .fixtures import fixture_dir, load_corpus, parse_input
from .lang import ParseError, parse_file
from .machine import run
from .oracle import ORACLE_NAMES

EXIT_USAGE = 1
EXIT_MISMATCH = 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj: dict) -> None:
    print(json.dumps(obj))


def _limits(args) -> AnalysisLimits:
    return AnalysisLimits(max_steps=args.budget, max_configs=args.max_configs)


def _inputs(args) -> list:
    try:
        return [parse_input(tok) for tok in args.input]
    except ValueError:
        raise UsageError(f"inputs must be integers or @file.hl, got {args.input}") from None


def cmd_run(args) -> int:
    p = parse_file(args.file)
    oracle = diagonal.oracle_by_name(args.oracle, _limits(args))
    out = run(p, _inputs(args), oracle, args.budget)
    if args.json:
        _emit(out.to_json())
    else:
        for line in out.output:
            print(line)
        extra = f": {out.trap_reason}" if out.trap_reason else ""
        print(f"-- {out.status}{extra} after {out.steps} steps")
    return {"halted": 0, "trapped": 2}.get(out.status, 3)


def cmd_analyze(args) -> int:
    p = parse_file(args.file)
    verdict = analyze(p, _inputs(args), limits=_limits(args))
    _emit(verdict.to_json())
    if isinstance(verdict, Halts):
        return 0
    return 4 if isinstance(verdict, Diverges) else 5


def cmd_diagonal(args) -> int:
    oracle = diagonal.oracle_by_name(args.oracle, _limits(args))
    report = diagonal.run_diagonal(oracle, _limits(args))
    if args.json:
        _emit(report.to_json())
    else:
        pred = "none" if report.prediction is None else report.prediction
        print(f"oracle={report.oracle} prediction={pred} actual={report.actual} "
              f"contradiction={str(report.contradiction).lower()}")
    return 0 if report.expected else EXIT_MISMATCH


def cmd_demo(args) -> int:
    variants = [args.variant] if args.variant else ["good", "bad"]
    reports = [cdf_demos.run_demo(cdf_demos.build_demo(args.name, v)) for v in variants]
    if args.json:
        _emit({"demos": [r.to_json() for r in reports]})
    else:
        for r in reports:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}")
            for line in r.output:
                print(f"  {line}")
            for line in r.diff:
                print(f"  {line}")
    return 0 if all(r.passed for r in reports) else EXIT_MISMATCH


def cmd_verify_corpus(args) -> int:
    manifest = Path(args.manifest) if args.manifest else fixture_dir() / "corpus" / "manifest.json"
    cases = load_corpus(manifest)
    report = diagonal.verify_good_halt_pair(cases, _limits(args), args.budget)
    if args.json:
        _emit(report.to_json())
    else:
        for c in report.cases:
            mark = {True: "PASS", False: "FAIL", None: "UNDECIDED"}[c.passed]
            print(f"[{mark}] {c.name}: truth={c.truth} answer={c.answer!r}")
        summary = report.to_json()
        print(f"{summary['passed']} passed, {summary['failed']} failed, "
              f"{summary['undecided']} undecided")
    return 0 if report.ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, default=1_000_000,
                        help="step budget for runs and analyses (default 10^6)")
    common.add_argument("--max-configs", type=int, default=1_000_000,
                        help="distinct configurations the analyzer may store (default 10^6)")
    common.add_argument("--oracle", choices=ORACLE_NAMES, default="cdf")
    common.add_argument("--log-decisions", action="store_true",
                        help="log every oracle decision as JSON on stderr")

    parser = _Parser(prog="hlab", description="Halting laboratory for the HL toy language.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="run a program")
    p.add_argument("file")
    p.add_argument("--input", action="append", default=[], help="Int literal or @file.hl")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", parents=[common], help="decide halting by state exploration")
    p.add_argument("file")
    p.add_argument("--input", action="append", default=[], help="Int literal or @file.hl")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("diagonal", parents=[common], help="run BAD(BAD) against an oracle")
    p.set_defaults(func=cmd_diagonal)

    p = sub.add_parser("demo", parents=[common], help="context-dependent function demos")
    p.add_argument("name", choices=("mul", "mul2"))
    p.add_argument("--variant", choices=("good", "bad"))
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("verify-corpus", parents=[common], help="check GOOD+HALT on a corpus")
    p.add_argument("manifest", nargs="?", help="corpus manifest (default: fixtures/corpus)")
    p.set_defaults(func=cmd_verify_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.budget < 1 or args.max_configs < 1:
        parser.error("--budget and --max-configs must be >= 1")
    if args.log_decisions:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, ParseError, UsageError) as exc:
        print(f"hlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
