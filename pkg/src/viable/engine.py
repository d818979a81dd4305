"""The realizability loop.

For n = 0, 1, 2, ... the engine asks whether the simplified base check fails
at depth n (some initial path of n steps gets stuck) and whether the extend
check holds at depth n (every valid n-step path can take one more step).  A
failed base check is reported as unrealizable with a stuck trace; a passing
extend check, with every base check up to n passing, is reported realizable.

The "realizable" answer is sound.  The "unrealizable" answer can be
spurious: the trace is a genuine stuck path of the contract, but a smarter
implementation might have avoided it.  Every Unrealizable result therefore
carries ``spurious_possible=True``.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from . import smtlib
from .evaluate import ReplayFailure, Step, Trace, replay_trace
from .smtlib import Fragment, Session, SolverVerdict, Status
from .syntax import TRUE, Contract
from .unroll import (
    QueryFormula,
    build_base_negation,
    build_extend_negation,
    build_initial_sat,
    build_successor_query,
    initial_at0,
    path_increment,
    prefix_vars,
    simplify_query,
    step_vars,
    stuck_tail,
)

log = logging.getLogger(__name__)


class EngineError(Exception):
    """A tool failure, never a verdict."""


class CounterexampleError(EngineError):
    """The solver's model does not describe a stuck trace."""


@dataclass(frozen=True)
class EngineOptions:
    max_depth: int = 200
    overall_timeout: float = 1000.0
    per_check_timeout: float = 20.0
    parallel: bool = True
    validate_counterexamples: bool = True
    solver: Optional[tuple[str, ...]] = None
    simplify: bool = False
    dump_dir: Optional[Path] = None

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.overall_timeout <= 0 or self.per_check_timeout <= 0:
            raise ValueError("timeouts must be positive")

    @property
    def solver_command(self) -> tuple[str, ...]:
        return tuple(self.solver) if self.solver else smtlib.default_solver_command()


@dataclass(frozen=True)
class Realizable:
    depth: int
    elapsed: float = field(default=0.0, compare=False)

    @property
    def base_depth_reached(self) -> int:
        return self.depth


@dataclass(frozen=True)
class Unrealizable:
    depth: int
    trace: Optional[Trace] = field(default=None, compare=False)
    spurious_possible: bool = True
    validation: str = field(default="confirmed", compare=False)  # or "unconfirmed", "skipped"
    reason: str = "stuck"  # or "no-initial-state"
    elapsed: float = field(default=0.0, compare=False)

    @property
    def base_depth_reached(self) -> int:
        return self.depth - 1


@dataclass(frozen=True)
class Unknown:
    base_depth_reached: int
    reason: str  # "solver-unknown", "timeout" or "max-depth"
    detail: str = field(default="", compare=False)
    elapsed: float = field(default=0.0, compare=False)


CheckResult = Union[Realizable, Unrealizable, Unknown]


# -- per-family incremental pipelines ----------------------------------------


class CheckPipeline:
    """Runs one family of checks (base or extend) at increasing depths in one
    incremental session."""

    def __init__(self, contract: Contract, kind: str, opts: EngineOptions):
        self.contract = contract
        self.kind = kind
        self.opts = opts
        self.session: Optional[Session] = None
        self.next_depth = 0
        self._lock = threading.Lock()
        self._closed = False

    def _fragments(self, n: int) -> tuple[Fragment, Fragment]:
        c = self.contract
        new_vars = step_vars(c.state_vars, n) + step_vars(c.input_vars, n + 1)
        path = path_increment(c, n)
        stuck_a, post, body = stuck_tail(c, n)
        delta = [stuck_a]
        if self.kind == "base":
            delta.append(initial_at0(c))
        if self.opts.simplify:
            path = tuple(p for p in path if p != TRUE)
            delta = [d for d in delta if d != TRUE]
        tail = smtlib.render_forall(post, body)
        delta_text = smtlib.render_conjunction([smtlib.render_expr(d) for d in delta] + [tail])
        return (
            Fragment(new_vars, tuple(smtlib.render_expr(p) for p in path)),
            Fragment((), (delta_text,)),
        )

    def query(self, n: int) -> QueryFormula:
        build = build_base_negation if self.kind == "base" else build_extend_negation
        q = build(self.contract, n)
        return simplify_query(q) if self.opts.simplify else q

    def check(self, n: int, timeout: float) -> SolverVerdict:
        if n != self.next_depth:
            raise EngineError(f"{self.kind} pipeline asked for depth {n}, expected {self.next_depth}")
        with self._lock:
            if self._closed:
                raise _Cancelled()
            if self.session is None:
                self.session = smtlib.start_session(self.opts.solver_command, self.opts.per_check_timeout)
        if self.opts.dump_dir is not None:
            _dump(self.opts.dump_dir, f"{self.kind}_{n}.smt2", smtlib.emit_script(self.query(n)))
        base, delta = self._fragments(n)
        symtab = {v.rendered: v for v in prefix_vars(self.contract, n)}
        try:
            verdict = smtlib.check_incremental(self.session, base, delta, symtab, timeout)
        except smtlib.SolverProtocolError:
            if self._closed:
                raise _Cancelled() from None
            raise
        self.next_depth = n + 1
        log.debug("%s check at depth %d: %s", self.kind, n, verdict)
        return verdict

    def close(self):
        with self._lock:
            self._closed = True
            if self.session is not None:
                self.session.close()


class _Cancelled(Exception):
    pass


def _dump(directory: Path, name: str, text: str):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / name).write_text(text)


# -- arbitration ---------------------------------------------------------------


def _decide(base: dict[int, SolverVerdict], ext: dict[int, SolverVerdict], max_depth: int):
    """The outcome of the sequential loop, if the results seen so far fix it.

    Returns None while undetermined, else ("unrealizable", n),
    ("realizable", n) or ("unknown", reason, detail).
    """
    for n in range(max_depth + 1):
        b = base.get(n)
        if b is None:
            return None
        if b.status is Status.SAT:
            return ("unrealizable", n)
        if not b.decided:
            return ("unknown", _reason(b), f"base check at depth {n}: {b}")
        e = ext.get(n)
        if e is None:
            return None
        if e.status is Status.UNSAT:
            return ("realizable", n)
        if not e.decided:
            return ("unknown", _reason(e), f"extend check at depth {n}: {e}")
    return ("unknown", "max-depth", f"no decision up to depth {max_depth}")


def _reason(v: SolverVerdict) -> str:
    return "timeout" if v.status is Status.TIMEOUT else "solver-unknown"


def _base_reached(base: dict[int, SolverVerdict]) -> int:
    n = -1
    while n + 1 in base and base[n + 1].status is Status.UNSAT:
        n += 1
    return n


class _Board:
    """Shared results of the two pipelines; the main thread waits on it."""

    def __init__(self, max_depth: int):
        self.max_depth = max_depth
        self.base: dict[int, SolverVerdict] = {}
        self.ext: dict[int, SolverVerdict] = {}
        self.cond = threading.Condition()
        self.error: Optional[BaseException] = None
        self.outcome = None

    def post(self, kind: str, n: int, verdict: SolverVerdict):
        with self.cond:
            (self.base if kind == "base" else self.ext)[n] = verdict
            if self.outcome is None:
                self.outcome = _decide(self.base, self.ext, self.max_depth)
            self.cond.notify_all()

    def fail(self, exc: BaseException):
        with self.cond:
            if self.error is None and self.outcome is None:
                self.error = exc
            self.cond.notify_all()

    @property
    def done(self) -> bool:
        return self.outcome is not None or self.error is not None


def _run_pipeline(pipe: CheckPipeline, board: _Board, deadline: float):
    # base stops at its first SAT, extend at its first UNSAT; both stop on unknown
    stop_on = Status.SAT if pipe.kind == "base" else Status.UNSAT
    try:
        for n in range(board.max_depth + 1):
            if board.done:
                return
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return
            verdict = pipe.check(n, min(pipe.opts.per_check_timeout, remaining))
            board.post(pipe.kind, n, verdict)
            if verdict.status is stop_on or not verdict.decided:
                return
    except _Cancelled:
        return
    except BaseException as exc:  # surfaced by the main thread
        board.fail(exc)


# -- public operations ------------------------------------------------------


def check_realizability(contract: Contract, opts: Optional[EngineOptions] = None) -> CheckResult:
    opts = opts or EngineOptions()
    start = time.monotonic()
    deadline = start + opts.overall_timeout

    def elapsed():
        return time.monotonic() - start

    initial = build_initial_sat(contract)
    if opts.dump_dir is not None:
        _dump(opts.dump_dir, "initial.smt2", smtlib.emit_script(initial))
    v = smtlib.check_query(initial, opts.solver_command, min(opts.per_check_timeout, opts.overall_timeout))
    if v.status is Status.UNSAT:
        return Unrealizable(0, None, validation="confirmed", reason="no-initial-state", elapsed=elapsed())
    if not v.decided:
        return Unknown(-1, _reason(v), f"initial-state check: {v}", elapsed=elapsed())

    board = _Board(opts.max_depth)
    pipes = {k: CheckPipeline(contract, k, opts) for k in ("base", "extend")}
    try:
        if opts.parallel:
            _run_parallel(pipes, board, deadline)
        else:
            _run_sequential(pipes, board, deadline)
    finally:
        for p in pipes.values():
            p.close()

    if board.error is not None and board.outcome is None:
        if isinstance(board.error, (smtlib.SolverError, EngineError)):
            raise board.error
        raise EngineError(f"internal error: {board.error!r}") from board.error
    outcome = board.outcome
    if outcome is None:
        return Unknown(_base_reached(board.base), "timeout",
                       f"overall timeout of {opts.overall_timeout:g}s", elapsed=elapsed())
    if outcome[0] == "realizable":
        return Realizable(outcome[1], elapsed=elapsed())
    if outcome[0] == "unknown":
        return Unknown(_base_reached(board.base), outcome[1], outcome[2], elapsed=elapsed())

    n = outcome[1]
    trace = extract_counterexample(board.base[n].assignment, n, contract)
    validation = "skipped"
    if opts.validate_counterexamples:
        validation = _validate(contract, trace, opts, deadline)
    return Unrealizable(n, trace, validation=validation, elapsed=elapsed())


def _run_sequential(pipes: dict[str, CheckPipeline], board: _Board, deadline: float):
    for n in range(board.max_depth + 1):
        for kind in ("base", "extend"):
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return
            pipe = pipes[kind]
            board.post(kind, n, pipe.check(n, min(pipe.opts.per_check_timeout, remaining)))
            if board.done:
                return


def _run_parallel(pipes: dict[str, CheckPipeline], board: _Board, deadline: float):
    threads = [
        threading.Thread(target=_run_pipeline, args=(p, board, deadline), name=f"viable-{k}", daemon=True)
        for k, p in pipes.items()
    ]
    for t in threads:
        t.start()
    with board.cond:
        while not board.done:
            remaining = deadline - time.monotonic()
            if remaining <= 0 or not any(t.is_alive() for t in threads):
                break
            board.cond.wait(min(remaining, 0.2))
    for p in pipes.values():
        p.close()
    for t in threads:
        t.join()


def _validate(contract: Contract, trace: Trace, opts: EngineOptions, deadline: float) -> str:
    try:
        replay_trace(contract, trace)
    except ReplayFailure as exc:
        raise CounterexampleError(f"solver model does not replay: {exc}") from exc
    timeout = max(1.0, min(opts.per_check_timeout, deadline - time.monotonic()))
    stuck = confirm_stuck(contract, trace, opts.solver_command, timeout)
    if stuck is None:
        return "unconfirmed"
    if not stuck:
        raise CounterexampleError(
            "the final state of the counterexample has a successor (model/universal mismatch)"
        )
    return "confirmed"


def extract_counterexample(assignment: dict, n: int, contract: Contract) -> Trace:
    """Re-index a base-check model into a trace of n steps plus the stuck input."""

    def at(decls, k):
        return {d.name: assignment[f"{d.name}${k}"] for d in decls}

    states, inputs = contract.state_vars, contract.input_vars
    return Trace(
        initial=at(states, 0),
        steps=tuple(Step(at(inputs, k), at(states, k)) for k in range(1, n + 1)),
        stuck_input=at(inputs, n + 1),
    )


def confirm_stuck(contract: Contract, trace: Trace, solver: Optional[Sequence[str]] = None,
                  timeout: float = 20.0) -> Optional[bool]:
    """True if the final state has no successor on the stuck input, False if
    it has one, None if the solver could not tell."""
    if trace.stuck_input is None:
        raise ValueError("trace has no stuck input")
    q = build_successor_query(contract, trace.final_state, trace.stuck_input)
    v = smtlib.check_query(q, solver, timeout)
    if v.status is Status.UNSAT:
        return True
    if v.status is Status.SAT:
        return False
    return None
