"""SMT-LIB 2 rendering and an incremental solver process driver.

The solver is an external executable speaking SMT-LIB 2 on stdin/stdout
(``z3 -in`` by default, overridable with ``VIABLE_SOLVER``).  Nothing here is
specific to one solver apart from that default.
"""

from __future__ import annotations

import enum
import logging
import os
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .syntax import Binary, Expr, Ite, Lit, Sort, Unary, Value, Var
from .unroll import QueryFormula, StepVar

log = logging.getLogger(__name__)

DEFAULT_SOLVER = ("z3", "-in")
SOLVER_ENV = "VIABLE_SOLVER"

_SORT = {Sort.BOOL: "Bool", Sort.INT: "Int", Sort.REAL: "Real"}
_OPS = {
    "and": "and", "or": "or", "=>": "=>", "=": "=", "<>": "distinct",
    "<": "<", "<=": "<=", ">": ">", ">=": ">=",
    "+": "+", "-": "-", "*": "*", "div": "div", "mod": "mod",
}


class SolverError(Exception):
    pass


class SolverSpawnError(SolverError):
    pass


class HandshakeError(SolverError):
    pass


class SolverProtocolError(SolverError):
    pass


class ModelParseError(SolverError):
    def __init__(self, message: str, sexpr=None):
        super().__init__(f"{message}: {render_sexpr(sexpr)}" if sexpr is not None else message)
        self.sexpr = sexpr


def default_solver_command() -> tuple[str, ...]:
    env = os.environ.get(SOLVER_ENV)
    return tuple(shlex.split(env)) if env else DEFAULT_SOLVER


# -- rendering --------------------------------------------------------------


def sort_name(sort: Sort) -> str:
    return _SORT[sort]


def render_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return f"(- {-v})" if v < 0 else str(v)
    if v < 0:
        return f"(- {render_value(-v)})"
    if v.denominator == 1:
        return f"{v.numerator}.0"
    return f"(/ {v.numerator}.0 {v.denominator}.0)"


def render_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return render_value(e.value)
    if isinstance(e, Var):
        if e.primed:
            raise ValueError(f"primed variable {e.name}' must be instantiated first")
        return e.name
    if isinstance(e, Unary):
        op = {"not": "not", "-": "-", "real": "to_real"}[e.op]
        return f"({op} {render_expr(e.arg)})"
    if isinstance(e, Binary):
        return f"({_OPS[e.op]} {render_expr(e.left)} {render_expr(e.right)})"
    if isinstance(e, Ite):
        return f"(ite {render_expr(e.cond)} {render_expr(e.then)} {render_expr(e.orelse)})"
    raise TypeError(f"unknown node {e!r}")


def render_declaration(v: StepVar) -> str:
    return f"(declare-const {v.rendered} {sort_name(v.sort)})"


def render_forall(bound: Sequence[StepVar], body: Expr) -> str:
    binders = " ".join(f"({v.rendered} {sort_name(v.sort)})" for v in bound)
    return f"(forall ({binders}) {render_expr(body)})"


def render_conjunction(parts: Sequence[str]) -> str:
    if not parts:
        return "true"
    if len(parts) == 1:
        return parts[0]
    return f"(and {' '.join(parts)})"


def render_query_assertion(query: QueryFormula) -> str:
    parts = [render_expr(c) for c in query.matrix]
    if query.forall:
        parts.append(render_forall(query.forall, query.body))
    return render_conjunction(parts)


def emit_script(query: QueryFormula) -> str:
    """A complete, byte-deterministic SMT-LIB script for ``query``."""
    lines = ["(set-option :produce-models true)"]
    lines.extend(render_declaration(v) for v in query.exists)
    lines.append(f"(assert {render_query_assertion(query)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# -- s-expressions and models -----------------------------------------------


def parse_sexprs(text: str) -> list:
    """Parse every S-expression in ``text``; atoms stay strings."""
    out, stack = [], []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "(":
            stack.append([])
            i += 1
        elif c == ")":
            if not stack:
                raise ModelParseError("unbalanced ')'")
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
            i += 1
        else:
            if c == "|":
                j = text.index("|", i + 1) + 1
                atom = text[i + 1:j - 1]
            elif c == '"':
                j = i + 1
                while True:
                    j = text.index('"', j) + 1
                    if j < n and text[j] == '"':
                        j += 1
                        continue
                    break
                atom = text[i:j]
            else:
                j = i
                while j < n and not text[j].isspace() and text[j] not in "();":
                    j += 1
                atom = text[i:j]
            (stack[-1] if stack else out).append(atom)
            i = j
    if stack:
        raise ModelParseError("unbalanced '('")
    return out


def render_sexpr(s) -> str:
    if isinstance(s, list):
        return "(" + " ".join(render_sexpr(x) for x in s) + ")"
    return str(s)


def value_from_sexpr(s, sort: Sort) -> Value:
    try:
        if sort is Sort.BOOL:
            if s in ("true", "false"):
                return s == "true"
            raise ValueError
        q = _number(s)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ModelParseError(f"cannot read a {sort} value", s) from None
    if sort is Sort.INT:
        if q.denominator != 1:
            raise ModelParseError("non-integral Int value", s)
        return q.numerator
    return q


def _number(s) -> Fraction:
    if isinstance(s, str):
        if s.startswith(("#", '"')) or not s[:1].isdigit():
            raise ValueError
        return Fraction(s)
    if len(s) == 2 and s[0] == "-":
        return -_number(s[1])
    if len(s) == 3 and s[0] == "/":
        return _number(s[1]) / _number(s[2])
    if len(s) == 2 and s[0] == "to_real":
        return _number(s[1])
    raise ValueError


def default_value(sort: Sort) -> Value:
    return {Sort.BOOL: False, Sort.INT: 0, Sort.REAL: Fraction(0)}[sort]


Assignment = dict[str, Value]


def parse_model(model_text: str, symtab: dict[str, StepVar]) -> Assignment:
    """Read a ``(get-model)`` reply into values for the symbols in ``symtab``.

    Symbols the solver left out are unconstrained and get the sort default.
    """
    sexprs = parse_sexprs(model_text)
    if len(sexprs) != 1 or not isinstance(sexprs[0], list):
        raise ModelParseError("expected one model S-expression", sexprs)
    entries = sexprs[0]
    if entries and entries[0] == "model":
        entries = entries[1:]
    found: Assignment = {}
    for entry in entries:
        if not (isinstance(entry, list) and entry and entry[0] == "define-fun"):
            raise ModelParseError("unexpected model entry", entry)
        if len(entry) != 5:
            raise ModelParseError("malformed define-fun", entry)
        _, name, params, _sort, body = entry
        if params or name not in symtab:
            continue
        found[name] = value_from_sexpr(body, symtab[name].sort)
    return {
        name: found.get(name, default_value(v.sort)) for name, v in symtab.items()
    }


# -- solver sessions --------------------------------------------------------


class Status(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SolverVerdict:
    status: Status
    assignment: Optional[Assignment] = None
    reason: Optional[str] = None

    @property
    def decided(self) -> bool:
        return self.status in (Status.SAT, Status.UNSAT)

    def __str__(self):
        return self.status.value + (f" ({self.reason})" if self.reason else "")


@dataclass(frozen=True)
class Fragment:
    decls: tuple[StepVar, ...] = ()
    assertions: tuple[str, ...] = ()


class Session:
    """One solver process.  Not thread-safe: a session has a single owner."""

    def __init__(self, command: Sequence[str], timeout: float = 20.0):
        self.command = tuple(command)
        self.timeout = timeout
        self.depth = 0
        self.declared: set[str] = set()
        self._frames: list[set[str]] = []
        self._lines: queue.Queue = queue.Queue()
        self._dead = False
        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise SolverSpawnError(f"cannot start solver {shlex.join(self.command)}: {exc}") from exc
        reader = threading.Thread(target=self._pump, daemon=True)
        reader.start()

    def _pump(self):
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    # -- low level

    def send(self, text: str):
        if self._dead:
            raise SolverProtocolError("solver session is closed")
        try:
            self.proc.stdin.write(text if text.endswith("\n") else text + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._dead = True
            raise SolverProtocolError(f"solver pipe closed: {exc}") from exc

    def _readline(self, deadline: float) -> Optional[str]:
        """Next non-empty line, or None on timeout."""
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                return None
            if line is None:
                self._dead = True
                raise SolverProtocolError("solver exited unexpectedly")
            if line.strip():
                return line

    def _read_sexpr(self, deadline: float) -> Optional[str]:
        buf, balance = "", 0
        while True:
            line = self._readline(deadline)
            if line is None:
                return None
            buf += line
            balance += _paren_balance(line)
            if balance <= 0:
                return buf

    # -- SMT-LIB commands

    def handshake(self, timeout: float = 10.0):
        try:
            self.send("(set-option :print-success false)")
            self.send("(set-option :produce-models true)")
            if _is_z3(self.command):
                # after push/pop z3 switches to its incremental core, which gives
                # up on quantified queries that a fresh process decides; this
                # option makes it retry those with the non-incremental solver
                self.send("(set-option :combined_solver.solver2_unknown 2)")
            self.send('(echo "viable-ready")')
            line = self._readline(time.monotonic() + timeout)
        except SolverProtocolError as exc:
            line = f"<{exc}>"
        if line is None or "viable-ready" not in line:
            self.close()
            raise HandshakeError(
                f"solver {shlex.join(self.command)} did not answer an SMT-LIB echo (got {line!r})"
            )

    def declare(self, v: StepVar):
        if v.rendered in self.declared:
            return
        self.send(render_declaration(v))
        self.declared.add(v.rendered)
        if self._frames:
            self._frames[-1].add(v.rendered)

    def assert_(self, text: str):
        self.send(f"(assert {text})")

    def push(self):
        self.send("(push 1)")
        self._frames.append(set())
        self.depth += 1

    def pop(self):
        if self.depth == 0:
            raise SolverProtocolError("pop on an empty assertion stack")
        self.send("(pop 1)")
        self.declared -= self._frames.pop()
        self.depth -= 1

    def check_sat(self, timeout: Optional[float] = None) -> Status:
        deadline = time.monotonic() + (self.timeout if timeout is None else timeout)
        self.send("(check-sat)")
        line = self._readline(deadline)
        if line is None:
            log.info("solver check timed out; killing %s", self.command[0])
            self.close()
            return Status.TIMEOUT
        answer = line.strip()
        if answer in ("sat", "unsat", "unknown"):
            return Status(answer)
        raise SolverProtocolError(f"unexpected reply to check-sat: {answer!r}")

    def get_model(self, symtab: dict[str, StepVar], timeout: float = 30.0) -> Assignment:
        self.send("(get-model)")
        text = self._read_sexpr(time.monotonic() + timeout)
        if text is None:
            raise SolverProtocolError("timed out reading the model")
        if text.lstrip().startswith("(error"):
            raise SolverProtocolError(f"solver error: {text.strip()}")
        return parse_model(text, symtab)

    def reason_unknown(self, timeout: float = 5.0) -> str:
        self.send("(get-info :reason-unknown)")
        text = self._read_sexpr(time.monotonic() + timeout)
        if text is None:
            return "unknown"
        parsed = parse_sexprs(text)
        if parsed and isinstance(parsed[0], list) and len(parsed[0]) == 2:
            return parsed[0][1].strip('"')
        return text.strip()

    def check(self, symtab: dict[str, StepVar], timeout: Optional[float] = None) -> SolverVerdict:
        status = self.check_sat(timeout)
        if status is Status.SAT:
            return SolverVerdict(status, assignment=self.get_model(symtab))
        if status is Status.UNKNOWN:
            return SolverVerdict(status, reason=self.reason_unknown())
        return SolverVerdict(status)

    @property
    def alive(self) -> bool:
        return not self._dead and self.proc.poll() is None

    def close(self):
        if self._dead and self.proc.poll() is not None:
            return
        self._dead = True
        try:
            self.proc.stdin.write("(exit)\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            pass
        try:
            self.proc.kill()
        except OSError:
            pass
        self.proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _is_z3(command: Sequence[str]) -> bool:
    return os.path.basename(command[0]).lower().startswith("z3")


def _paren_balance(line: str) -> int:
    balance, in_str, in_bar = 0, False, False
    for c in line:
        if in_str:
            in_str = c != '"'
        elif in_bar:
            in_bar = c != "|"
        elif c == '"':
            in_str = True
        elif c == "|":
            in_bar = True
        elif c == "(":
            balance += 1
        elif c == ")":
            balance -= 1
    return balance


def start_session(solver_command: Optional[Sequence[str]] = None, timeout: float = 20.0) -> Session:
    session = Session(solver_command or default_solver_command(), timeout)
    session.handshake()
    return session


def check_incremental(session: Session, base: Fragment, delta: Fragment,
                      symtab: dict[str, StepVar], timeout: Optional[float] = None) -> SolverVerdict:
    """Check ``base and delta``, keeping ``base`` asserted for later calls.

    ``base`` is added at the top level; ``delta`` lives inside a push/pop
    frame, so the session afterwards holds exactly the accumulated bases.
    """
    for v in base.decls:
        session.declare(v)
    for a in base.assertions:
        session.assert_(a)
    session.push()
    for v in delta.decls:
        session.declare(v)
    for a in delta.assertions:
        session.assert_(a)
    verdict = session.check(symtab, timeout)
    if session.alive:
        session.pop()
    return verdict


def check_query(query: QueryFormula, solver_command: Optional[Sequence[str]] = None,
                timeout: float = 20.0) -> SolverVerdict:
    """Check one query in a fresh solver process."""
    with start_session(solver_command, timeout) as session:
        for v in query.exists:
            session.declare(v)
        session.assert_(render_query_assertion(query))
        return session.check(query.symbols, timeout)
