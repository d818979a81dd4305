"""Concrete semantics: expression evaluation, traces and trace replay.

Values are plain Python objects: ``bool``, ``int`` (unbounded) and
``fractions.Fraction`` for reals.  An environment maps variable names to
values; the next-state value of ``x`` is looked up under the key ``"x'"``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional

from .syntax import Binary, Contract, Expr, Ite, Lit, Sort, Unary, Value, Var, VarDecl

Env = Mapping[str, Value]


class EvalError(Exception):
    pass


class DivisionByZero(EvalError, ArithmeticError):
    pass


class MissingBinding(EvalError, LookupError):
    pass


def smt_div(a: int, b: int) -> int:
    """Integer division as in SMT-LIB: ``a = b*q + r`` with ``0 <= r < |b|``."""
    if b == 0:
        raise DivisionByZero(f"{a} div 0")
    r = a % abs(b)
    return (a - r) // b


def smt_mod(a: int, b: int) -> int:
    if b == 0:
        raise DivisionByZero(f"{a} mod 0")
    return a % abs(b)


def eval_expr(e: Expr, env: Env) -> Value:
    match e:
        case Lit(value=v):
            return v
        case Var(name=name, primed=primed):
            key = name + "'" if primed else name
            try:
                return env[key]
            except KeyError:
                raise MissingBinding(f"no value for {key!r}") from None
        case Unary(op="not", arg=a):
            return not eval_expr(a, env)
        case Unary(op="-", arg=a):
            return -eval_expr(a, env)
        case Unary(op="real", arg=a):
            return Fraction(eval_expr(a, env))
        case Ite(cond=c, then=t, orelse=f):
            return eval_expr(t, env) if eval_expr(c, env) else eval_expr(f, env)
        case Binary(op="and", left=l, right=r):
            return bool(eval_expr(l, env)) and bool(eval_expr(r, env))
        case Binary(op="or", left=l, right=r):
            return bool(eval_expr(l, env)) or bool(eval_expr(r, env))
        case Binary(op="=>", left=l, right=r):
            return (not eval_expr(l, env)) or bool(eval_expr(r, env))
        case Binary(op=op, left=l, right=r):
            return _arith(op, eval_expr(l, env), eval_expr(r, env))
    raise TypeError(f"cannot evaluate {e!r}")


def _arith(op: str, a, b) -> Value:
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "div":
        return smt_div(a, b)
    if op == "mod":
        return smt_mod(a, b)
    raise TypeError(f"unknown operator {op!r}")


# -- traces -----------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    input: dict[str, Value]
    next: dict[str, Value]


@dataclass(frozen=True)
class Trace:
    """Initial state, alternating inputs/states, and optionally the input on
    which the final state has no permitted successor."""

    initial: dict[str, Value]
    steps: tuple[Step, ...] = ()
    stuck_input: Optional[dict[str, Value]] = None

    @property
    def final_state(self) -> dict[str, Value]:
        return self.steps[-1].next if self.steps else self.initial

    def states(self) -> list[dict[str, Value]]:
        return [self.initial] + [s.next for s in self.steps]


class ReplayVerdict(enum.Enum):
    OK = "ok"
    NEEDS_SUCCESSOR_CHECK = "needs-successor-check"


class ReplayFailure(EvalError):
    def __init__(self, step: int, condition: str, values: dict[str, Value]):
        shown = ", ".join(f"{k}={show_value(v)}" for k, v in values.items())
        super().__init__(f"step {step}: {condition} does not hold at {{{shown}}}")
        self.step = step
        self.condition = condition
        self.values = values


def show_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def transition_env(state: Env, inp: Env, nxt: Optional[Env] = None) -> dict[str, Value]:
    env = dict(state)
    env.update(inp)
    if nxt is not None:
        env.update({k + "'": v for k, v in nxt.items()})
    return env


def replay_trace(contract: Contract, trace: Trace) -> ReplayVerdict:
    """Re-evaluate every condition a counterexample trace claims to satisfy.

    Raises ReplayFailure for the first condition that is false.  Whether the
    last state really has no successor cannot be decided by evaluation, so a
    trace with a stuck input yields NEEDS_SUCCESSOR_CHECK.
    """
    _check_total(contract.state_vars, trace.initial, "initial state")
    if not eval_expr(contract.initial, trace.initial):
        raise ReplayFailure(0, "init", dict(trace.initial))
    state = trace.initial
    for k, step in enumerate(trace.steps, start=1):
        _check_total(contract.input_vars, step.input, f"input {k}")
        _check_total(contract.state_vars, step.next, f"state {k}")
        env = transition_env(state, step.input)
        if not eval_expr(contract.assumption, env):
            raise ReplayFailure(k, "assume", env)
        env = transition_env(state, step.input, step.next)
        if not eval_expr(contract.transition, env):
            raise ReplayFailure(k, "trans", env)
        state = step.next
    if trace.stuck_input is None:
        return ReplayVerdict.OK
    _check_total(contract.input_vars, trace.stuck_input, "stuck input")
    env = transition_env(state, trace.stuck_input)
    if not eval_expr(contract.assumption, env):
        raise ReplayFailure(len(trace.steps) + 1, "assume", env)
    return ReplayVerdict.NEEDS_SUCCESSOR_CHECK


def _check_total(decls: tuple[VarDecl, ...], valuation: Env, what: str):
    missing = [d.name for d in decls if d.name not in valuation]
    if missing:
        raise MissingBinding(f"{what} lacks values for {', '.join(missing)}")


# -- JSON -------------------------------------------------------------------


def value_to_json(v: Value) -> Any:
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return str(v)
    return f"{v.numerator}/{v.denominator}"


def value_from_json(raw: Any, sort: Optional[Sort] = None) -> Value:
    if isinstance(raw, bool):
        value: Value = raw
    elif isinstance(raw, str) and "/" in raw:
        value = Fraction(raw)
    elif isinstance(raw, (str, int)):
        value = int(raw)
    else:
        raise ValueError(f"bad trace value {raw!r}")
    if sort is Sort.REAL and not isinstance(value, bool):
        value = Fraction(value)
    elif sort is Sort.INT and isinstance(value, Fraction):
        if value.denominator != 1:
            raise ValueError(f"{raw!r} is not an integer")
        value = value.numerator
    elif sort is Sort.BOOL and not isinstance(value, bool):
        raise ValueError(f"{raw!r} is not a boolean")
    return value


def trace_to_json(trace: Trace) -> dict:
    def val(d):
        return {k: value_to_json(v) for k, v in d.items()}

    return {
        "initial": val(trace.initial),
        "steps": [{"input": val(s.input), "next": val(s.next)} for s in trace.steps],
        "stuck_input": None if trace.stuck_input is None else val(trace.stuck_input),
    }


def trace_from_json(data: dict | str, contract: Optional[Contract] = None) -> Trace:
    if isinstance(data, str):
        data = json.loads(data)
    sorts = {d.name: d.sort for d in contract.decls} if contract else {}

    def val(d):
        return {k: value_from_json(v, sorts.get(k)) for k, v in d.items()}

    stuck = data.get("stuck_input")
    return Trace(
        initial=val(data["initial"]),
        steps=tuple(Step(val(s["input"]), val(s["next"])) for s in data.get("steps", [])),
        stuck_input=None if stuck is None else val(stuck),
    )
