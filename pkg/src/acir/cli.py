"""Command-line interface of the package, installed as 'acir'.

Subcommands:

    * rank - rank a folder of sources for a query.

    * match - score a single source, optionally explaining the witness
    and writing the explored transitions as a DOT graph.

    * emit-asp - write the answer-set program of a search stage.

    * bench - generate random instances and time the search.

    * validate - check sources, including the emergent non-determinism
    check.

Exit codes: 0 success, 1 usage error, 2 parse or validation error, 3
semantic error. Every error is also written to stderr as one JSON object
per line.

"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from acir import __version__
from acir.functions import asp_emitter, benchmark, corpus, utils
from acir.functions.core_types import AcirError
from acir.functions.dsl_parser import DslError, read_query, read_source
from acir.functions.initial_state import completion_set, source_expansion
from acir.functions.matcher import (
    QueryNotInSignature,
    assumed_literals,
    find_match,
    format_explanation,
    unmatched_models,
)
from acir.functions.transition import (
    CapExceeded,
    EmergentNonDeterminism,
    check_emergent_nondeterminism,
    models,
    paths_to_dot,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_SEMANTIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _report(error: str, message: str, **fields) -> None:
    print(json.dumps({"error": error, "message": message, **fields}), file=sys.stderr)


def _report_exception(exc: BaseException) -> None:
    fields = exc.details() if isinstance(exc, AcirError) else {}
    _report(type(exc).__name__, str(exc), **fields)


def _exit_code(exc: BaseException) -> int:
    semantic = (EmergentNonDeterminism, CapExceeded, QueryNotInSignature)
    if isinstance(exc, semantic):
        return EXIT_SEMANTIC
    return EXIT_INVALID


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("should be a non-negative integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("should be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="acir",
        description="Rank narrative sources by their relevance to a query.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--quiet", action="store_true", help="no progress bars")
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)

    rank = commands.add_parser("rank", help="rank a folder of sources")
    rank.add_argument("--query", required=True, type=Path)
    rank.add_argument("--sources", required=True, type=Path)
    rank.add_argument("--max-budget", type=_non_negative, default=None)
    rank.add_argument("--jobs", type=_positive, default=None)
    rank.add_argument("--format", choices=("table", "json"), default="table")

    match = commands.add_parser("match", help="score a single source")
    match.add_argument("--query", required=True, type=Path)
    match.add_argument("--source", required=True, type=Path)
    match.add_argument("--max-budget", type=_non_negative, default=None)
    match.add_argument("--explain", action="store_true")
    match.add_argument("--emit-dot", type=Path, default=None)

    emit = commands.add_parser("emit-asp", help="write an answer-set program")
    emit.add_argument("--source", required=True, type=Path)
    emit.add_argument("--stage", choices=asp_emitter.STAGES, default="expansion")
    emit.add_argument("--query", type=Path, default=None)
    emit.add_argument(
        "--forced", default=None, help="comma-separated forced fluents for 'c1'"
    )
    emit.add_argument("-o", "--output", type=Path, default=None)

    bench = commands.add_parser("bench", help="time the search on random instances")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--steps", type=int, default=5)
    bench.add_argument("--steps-range", type=int, nargs=2, metavar=("LO", "HI"))
    bench.add_argument("--fluents", type=int, default=6)
    bench.add_argument("--concurrency", type=int, default=3)
    bench.add_argument("--unknown-actions", type=int, default=0)
    bench.add_argument("--instances", type=int, default=20)
    bench.add_argument("--max-budget", type=_non_negative, default=None)
    bench.add_argument("--write-instances", type=Path, default=None)
    bench.add_argument("--plot", type=Path, default=None)
    bench.add_argument("-o", "--output", type=Path, default=None)

    validate = commands.add_parser("validate", help="check sources")
    validate.add_argument("sources", nargs="+", type=Path)
    validate.add_argument("--fluent-cap", type=_positive, default=14)
    return parser


def _rank(args) -> int:
    query = read_query(args.query)
    sources, failures = corpus.load_corpus(args.sources)
    for failure in failures:
        _report(failure.error, failure.message, path=failure.path)
    if failures and not sources:
        return EXIT_INVALID
    config = corpus.RankConfig(args.max_budget, utils.resolve_jobs(args.jobs))
    ranked = corpus.rank(query, sources, config, progress=not args.quiet)
    if args.format == "json":
        print(ranked.to_json())
    else:
        print(ranked.format_table(), end="")
    return EXIT_OK


def _match(args) -> int:
    query = read_query(args.query)
    source = read_source(args.source).source
    result = find_match(source, query, args.max_budget)
    if args.explain:
        print(format_explanation(result, source, query), end="")
    else:
        score = "inf" if not result.matched else result.score
        print(json.dumps({"id": source.id, "score": score, "matched": result.matched,
                          "witness": result.witness_summary()}))
    if args.emit_dot is not None:
        if result.matched:
            states = completion_set(
                result.expansion,
                result.witness_F,
                source.description,
                source.defaults,
                source.fluents,
            ).states
            paths = models(states, result.witness_s, source.description)
        else:
            paths = unmatched_models(source)
        utils.prepare_output(args.emit_dot, rewrite=True)
        args.emit_dot.write_text(paths_to_dot(paths, source.description), encoding="utf-8")
    return EXIT_OK


def _emit(args) -> int:
    source = read_source(args.source).source
    forced = None
    if args.forced:
        forced = [name.strip() for name in args.forced.split(",") if name.strip()]
    initial = sequence = None

    if args.stage != "expansion":
        result = None
        if args.query is not None:
            result = find_match(source, read_query(args.query))
        matched = result is not None and result.matched
        if args.stage == "c1":
            initial = source_expansion(source)
            if initial is None:
                initial = source.initial
            if matched:
                forced = forced if forced is not None else result.witness_F
                sequence = result.witness_s
        elif matched:
            initial = assumed_literals(result.witness_path, result.expansion)

    program = asp_emitter.emit_for_findmatch_stage(
        source, args.stage, forced, sequence, initial
    )
    if args.output is None:
        print(program.text, end="")
    else:
        asp_emitter.write_program(program, args.output)
    return EXIT_OK


def _bench(args) -> int:
    try:
        config = benchmark.BenchmarkConfig(
            fluents=args.fluents,
            steps=args.steps if args.steps_range is None else args.steps_range[0],
            concurrency=args.concurrency,
            unknown_actions=args.unknown_actions,
            instances=args.instances,
            seed=args.seed,
            max_budget=args.max_budget,
        )
    except ValueError as exc:
        _report("UsageError", str(exc))
        return EXIT_USAGE
    progress = not args.quiet
    if args.steps_range is not None:
        report = benchmark.run_steps_experiment(
            config, tuple(args.steps_range), args.output, progress
        )
        print(benchmark.summarize_by_steps(report).to_string(index=False))
    else:
        bench = benchmark.generate_benchmark(config, progress)
        if args.write_instances is not None:
            benchmark.write_benchmark(bench, args.write_instances)
        report = benchmark.run_bench(bench, args.output, progress)
        summary = benchmark.summarize(report)
        for key, value in summary.items():
            print(f"{key}: {value:.2f}" if isinstance(value, float) else f"{key}: {value}")
    if args.plot is not None:
        benchmark.plot_benchmark(report, args.plot)
    return EXIT_OK


def _validate(args) -> int:
    code = EXIT_OK
    for path in args.sources:
        try:
            source = read_source(path).source
        except (DslError, OSError) as exc:
            _report_exception(exc)
            code = EXIT_INVALID
            continue
        try:
            witnesses = check_emergent_nondeterminism(
                source.description, source.signature, args.fluent_cap
            )
        except CapExceeded as exc:
            logger.warning("%s: non-determinism check skipped: %s", path, exc)
            print(f"{path}: ok (non-determinism check skipped)")
            continue
        if witnesses:
            code = EXIT_INVALID
            for witness in witnesses:
                logger.warning(
                    "%s: action %s in state %s has %d successor states",
                    path,
                    sorted(witness.action),
                    witness.state,
                    len(witness.successors),
                )
                _report(
                    "EmergentNonDeterminism",
                    f"{len(witness.successors)} successor states",
                    path=str(path),
                    state=str(witness.state),
                    action=sorted(witness.action),
                )
        else:
            print(f"{path}: ok")
    return code


COMMANDS = {
    "rank": _rank,
    "match": _match,
    "emit-asp": _emit,
    "bench": _bench,
    "validate": _validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _report("UsageError", str(exc))
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except (AcirError, OSError, ValueError) as exc:
        _report_exception(exc)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
