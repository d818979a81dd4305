"""Command-line front end.

Subcommands::

    viable check FILE        run the realizability engine
    viable oracle FILE       exact answer on the file's @oracle-domain
    viable dump-smt FILE -n K
    viable corpus --seeds A..B

Exit codes for ``check`` and ``oracle``: 0 realizable, 1 unrealizable,
2 unknown, 3 tool error.  ``corpus`` exits 0 when no violation was found and
1 otherwise.  Verdicts go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import smtlib
from .corpus import corpus
from .differential import engine_vs_oracle, theorem_violations
from .engine import EngineError, EngineOptions, Realizable, Unknown, Unrealizable, check_realizability
from .evaluate import Trace, show_value, trace_to_json
from .oracle import OracleError, finite_game, parse_domain_annotation
from .parser import ContractError
from .syntax import Contract
from .typecheck import TypedContract, load_contract
from .unroll import build_base_negation, build_extend_negation, simplify_query

EXIT_REALIZABLE, EXIT_UNREALIZABLE, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3

log = logging.getLogger("viable")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "unknown"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _depth(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _seed_range(text):
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            return range(int(lo), int(lo) + 1)
        return range(int(lo), int(hi) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--solver", help="solver command line (default: $VIABLE_SOLVER or 'z3 -in')")
    p.add_argument("--solver-arg", action="append", default=[], metavar="ARG",
                   help="extra argument for the solver (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="viable", description="Realizability checker for assume/guarantee contracts.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="decide realizability with the SMT engine")
    check.add_argument("file", type=Path)
    _add_solver_flags(check)
    check.add_argument("--max-depth", type=_depth, default=200)
    check.add_argument("--timeout", type=_positive(float), default=1000.0, help="overall seconds")
    check.add_argument("--check-timeout", type=_positive(float), default=20.0, help="seconds per solver check")
    check.add_argument("--no-parallel", action="store_true", help="run base and extend checks in turn")
    check.add_argument("--format", choices=("text", "json"), default="text")
    check.add_argument("--dump-smt", type=Path, metavar="DIR", help="write every query to DIR")
    check.add_argument("--simplify", action="store_true", help="drop literal true conjuncts")

    oracle = sub.add_parser("oracle", help="exact verdict on the file's @oracle-domain")
    oracle.add_argument("file", type=Path)
    oracle.add_argument("--format", choices=("text", "json"), default="text")

    dump = sub.add_parser("dump-smt", help="write the base and extend scripts for one depth")
    dump.add_argument("file", type=Path)
    dump.add_argument("-n", "--depth", type=_depth, required=True)
    dump.add_argument("-o", "--output", type=Path, default=Path("."), metavar="DIR")
    dump.add_argument("--simplify", action="store_true")

    cor = sub.add_parser("corpus", help="differential run over generated contracts")
    cor.add_argument("--seeds", type=_seed_range, default=range(0, 100), metavar="A..B")
    _add_solver_flags(cor)
    cor.add_argument("--max-depth", type=_depth, default=5)
    cor.add_argument("--check-timeout", type=_positive(float), default=5.0)
    cor.add_argument("--jobs", type=_positive(int), default=1)
    cor.add_argument("--no-engine", action="store_true", help="only the oracle-side theorem checks")
    return parser


def solver_command(solver: Optional[str], extra: Sequence[str]) -> tuple[str, ...]:
    base = tuple(shlex.split(solver)) if solver else smtlib.default_solver_command()
    return base + tuple(extra)


def _load(path: Path) -> tuple[str, TypedContract]:
    text = path.read_text(encoding="utf-8")
    contract = load_contract(text)
    for w in contract.warnings:
        print(f"{path}: warning: {w}", file=sys.stderr)
    return text, contract


# -- check ----------------------------------------------------------------------


def format_trace(contract: Contract, trace: Trace) -> str:
    """One row per step; the stuck input is the final row, marked ``>>``."""
    names = [d.name for d in contract.state_vars] + [d.name for d in contract.input_vars]
    rows = [["step", *names]]
    blank_inputs = [""] * len(contract.input_vars)

    def state_cells(state):
        return [show_value(state[d.name]) for d in contract.state_vars]

    def input_cells(inp):
        return [show_value(inp[d.name]) for d in contract.input_vars]

    rows.append(["0", *state_cells(trace.initial), *blank_inputs])
    for k, step in enumerate(trace.steps, start=1):
        rows.append([str(k), *state_cells(step.next), *input_cells(step.input)])
    if trace.stuck_input is not None:
        rows.append([">> stuck", *[""] * len(contract.state_vars), *input_cells(trace.stuck_input)])
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = [" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines)


def result_to_json(result) -> dict:
    if isinstance(result, Realizable):
        return {"result": "realizable", "n": result.depth, "base_depth_reached": result.base_depth_reached,
                "elapsed": round(result.elapsed, 3)}
    if isinstance(result, Unrealizable):
        return {
            "result": "unrealizable",
            "n": result.depth,
            "spurious_possible": result.spurious_possible,
            "reason": result.reason,
            "validation": result.validation,
            "base_depth_reached": result.base_depth_reached,
            "elapsed": round(result.elapsed, 3),
            "trace": None if result.trace is None else trace_to_json(result.trace),
        }
    return {"result": "unknown", "base_depth_reached": result.base_depth_reached, "reason": result.reason,
            "detail": result.detail, "elapsed": round(result.elapsed, 3)}


def result_to_text(contract: Contract, result) -> str:
    if isinstance(result, Realizable):
        head = f"REALIZABLE (n={result.depth})"
    elif isinstance(result, Unrealizable):
        head = f"UNREALIZABLE (n={result.depth})"
    else:
        head = f"UNKNOWN ({result.reason})"
    lines = [head, f"base check reached depth: {result.base_depth_reached}",
             f"elapsed: {result.elapsed:.3f}s"]
    if isinstance(result, Unknown) and result.detail:
        lines.append(f"detail: {result.detail}")
    if isinstance(result, Unrealizable):
        if result.trace is None:
            lines.append("no state satisfies the initial guarantee")
        else:
            lines.append(f"counterexample ({result.validation}):")
            lines.append(format_trace(contract, result.trace))
            lines.append("note: this counterexample may be spurious; a realization could avoid the "
                         "stuck state by choosing different earlier transitions")
    return "\n".join(lines)


def exit_code(result) -> int:
    if isinstance(result, Realizable):
        return EXIT_REALIZABLE
    if isinstance(result, Unrealizable):
        return EXIT_UNREALIZABLE
    return EXIT_UNKNOWN


def cmd_check(args) -> int:
    _, contract = _load(args.file)
    opts = EngineOptions(
        max_depth=args.max_depth,
        overall_timeout=args.timeout,
        per_check_timeout=args.check_timeout,
        parallel=not args.no_parallel,
        solver=solver_command(args.solver, args.solver_arg),
        simplify=args.simplify,
        dump_dir=args.dump_smt,
    )
    result = check_realizability(contract, opts)
    if args.format == "json":
        print(json.dumps(result_to_json(result)))
    else:
        print(result_to_text(contract, result))
    return exit_code(result)


# -- oracle -----------------------------------------------------------------------


def cmd_oracle(args) -> int:
    text, contract = _load(args.file)
    dom = parse_domain_annotation(text)
    if dom is None:
        raise OracleError(f"{args.file} has no '-- @oracle-domain' annotation")
    game = finite_game(contract, dom)
    viable = game.viable()
    realizable = game.realizable()
    if args.format == "json":
        print(json.dumps({"result": "realizable" if realizable else "unrealizable",
                          "viable_states": int(viable.sum()), "states": len(game.states)}))
    else:
        print("REALIZABLE" if realizable else "UNREALIZABLE")
        print(f"viable states: {int(viable.sum())} of {len(game.states)}")
    return EXIT_REALIZABLE if realizable else EXIT_UNREALIZABLE


# -- dump-smt --------------------------------------------------------------------


def dump_scripts(contract: Contract, stem: str, n: int, out: Path, simplify: bool = False) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for kind, build in (("base", build_base_negation), ("extend", build_extend_negation)):
        q = build(contract, n)
        if simplify:
            q = simplify_query(q)
        path = out / f"{stem}_{kind}_{n}.smt2"
        path.write_text(smtlib.emit_script(q))
        written.append(path)
    return written


def cmd_dump(args) -> int:
    _, contract = _load(args.file)
    for path in dump_scripts(contract, args.file.stem, args.depth, args.output, args.simplify):
        print(path)
    return 0


# -- corpus ----------------------------------------------------------------------


def cmd_corpus(args) -> int:
    opts = EngineOptions(max_depth=args.max_depth, per_check_timeout=args.check_timeout,
                         solver=solver_command(args.solver, args.solver_arg))

    def one(item):
        seed, contract, dom = item
        problems = [f"theorem: {v}" for v in theorem_violations(finite_game(contract, dom))]
        engine = "skipped"
        if not args.no_engine:
            rec = engine_vs_oracle(contract, dom, opts, seed)
            problems += [f"engine: {v}" for v in rec.violations]
            engine = rec.engine
        return seed, engine, problems

    counts: dict[str, int] = {}
    bad = 0
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        for seed, engine, problems in pool.map(one, corpus(args.seeds)):
            counts[engine] = counts.get(engine, 0) + 1
            for p in problems:
                print(f"seed {seed}: {p}")
            bad += bool(problems)
            log.info("seed %d: engine %s, %d problem(s)", seed, engine, len(problems))
    summary = ", ".join(f"{k} {v}" for k, v in sorted(counts.items()))
    print(f"{len(args.seeds)} contracts; engine verdicts: {summary}; contracts with violations: {bad}")
    return 0 if bad == 0 else 1


COMMANDS = {"check": cmd_check, "oracle": cmd_oracle, "dump-smt": cmd_dump, "corpus": cmd_corpus}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (ContractError, OracleError, smtlib.SolverError, EngineError, OSError, ValueError) as exc:
        print(f"viable: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
