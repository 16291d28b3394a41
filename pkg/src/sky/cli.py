"""Command-line entry point: ``sky run|check|compare|corpus``."""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .circumscription import OracleGuardError
from .parser import ParseError, parse_program
from .syntax import ValidityError

_BRANCH = {"lex": "lexicographic", "mcf": "most-constrained-first"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sky", description="SKY / circumscriptive Datalog engine")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a program and print its minimal models")
    run.add_argument("file")
    run.add_argument("--mode", choices=harness.MODES, default="backtrack")
    run.add_argument("--branch", choices=sorted(_BRANCH), default="lex")
    run.add_argument("--no-dominance", action="store_true", help="disable dominance pruning")
    run.add_argument("--max-models", type=int, metavar="N")
    run.add_argument("--stats", action="store_true", help="write a JSON stats record to stderr")
    run.add_argument("--force-large", action="store_true",
                     help="allow brute force beyond the decision-atom bound")

    check = sub.add_parser("check", help="parse and validate only")
    check.add_argument("file")

    compare = sub.add_parser("compare", help="run oracle, enumerate and backtrack and compare")
    compare.add_argument("file")
    compare.add_argument("--force-large", action="store_true")

    corpus = sub.add_parser("corpus", help="run the regression corpus")
    corpus.add_argument("directory", nargs="?", help="corpus directory (default: shipped corpus)")
    corpus.add_argument("--rebuild", action="store_true",
                        help="regenerate case expectations with the oracle")
    return parser


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _report_error(exc: Exception, path: str) -> int:
    if isinstance(exc, ValidityError):
        for v in exc.violations:
            print(f"{path}: {v}", file=sys.stderr)
    else:
        print(f"{path}: {exc}", file=sys.stderr)
    return harness.exit_code(exc)


def _cmd_run(args) -> int:
    if args.max_models is not None and args.max_models < 1:
        print("sky: --max-models must be positive", file=sys.stderr)
        return 2
    report = harness.run_text(
        _read(args.file), args.mode, args.file,
        branch=_BRANCH[args.branch], dominance=not args.no_dominance,
        max_models=args.max_models, force_large=args.force_large)
    for line in report.lines:
        print(line)
    print(f"MODELS: {report.model_count}")
    if report.truncated:
        print(f"sky: stopped after {args.max_models} models (truncated)", file=sys.stderr)
    if args.stats:
        print(json.dumps(report.stats_record()), file=sys.stderr)
    return harness.EXIT_OK


def _cmd_check(args) -> int:
    program = parse_program(_read(args.file))
    policy = program.policy
    print(f"OK: {len(program.rules)} statements; "
          f"minimized {{{', '.join(sorted(policy.minimized))}}}, "
          f"fixed {{{', '.join(sorted(policy.fixed))}}}, "
          f"varying {{{', '.join(sorted(policy.varying))}}}")
    return harness.EXIT_OK


def _cmd_compare(args) -> int:
    comparison = harness.compare_modes(args.file, args.force_large)
    print(comparison.table())
    return harness.EXIT_OK if comparison.ok else harness.EXIT_CORPUS


def _cmd_corpus(args) -> int:
    directory = args.directory or harness.shipped_corpus()
    if args.rebuild:
        for path in harness.corpus_files(directory):
            case = harness.rebuild_case(path)
            print(f"rebuilt {case.name}: {case.expected_model_count} models")
    results = harness.run_corpus(directory)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"CORPUS: {len(results) - failed}/{len(results)} passed")
    return harness.EXIT_CORPUS if failed or not results else harness.EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "check": _cmd_check,
               "compare": _cmd_compare, "corpus": _cmd_corpus}[args.command]
    target = getattr(args, "file", None) or getattr(args, "directory", None) or "sky"
    try:
        return handler(args)
    except (ParseError, ValidityError, OracleGuardError) as exc:
        return _report_error(exc, target)
    except OSError as exc:
        print(f"sky: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
