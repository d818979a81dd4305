"""Abstract syntax for assume/guarantee contracts, plus a pretty-printer.

A contract declares input and state variables and carries three boolean
expressions: the assumption over (state, input), the initial guarantee over
state, and the transitional guarantee over (state, input, next state).  Next
state values are written with a postfix prime, ``x'``.

Expression nodes are frozen dataclasses.  Structural equality ignores the
``sort`` annotation filled in by the type checker and the source position.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterator, Optional, Union


class Sort(Enum):
    BOOL = "bool"
    INT = "int"
    REAL = "real"

    def __str__(self):
        return self.value


class Kind(Enum):
    INPUT = "input"
    STATE = "state"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class VarDecl:
    name: str
    sort: Sort
    kind: Kind


Value = Union[bool, int, Fraction]

UNARY_OPS = ("not", "-", "real")
BOOL_OPS = ("and", "or", "=>")
EQUALITY_OPS = ("=", "<>")
ORDER_OPS = ("<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*")
INT_OPS = ("div", "mod")
BINARY_OPS = BOOL_OPS + EQUALITY_OPS + ORDER_OPS + ARITH_OPS + INT_OPS


@dataclass(frozen=True)
class Expr:
    sort: Optional[Sort] = field(default=None, compare=False, repr=False, kw_only=True)
    pos: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False, kw_only=True)

    def __str__(self):
        return format_expr(self)


@dataclass(frozen=True, eq=False)
class Lit(Expr):
    value: Value

    # bool is an int subclass, so the literal's Python type takes part in equality
    def __eq__(self, other):
        return (
            isinstance(other, Lit)
            and type(self.value) is type(other.value)
            and self.value == other.value
        )

    def __hash__(self):
        return hash((Lit, type(self.value), self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str
    primed: bool = False


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Ite(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


TRUE = Lit(True, sort=Sort.BOOL)
FALSE = Lit(False, sort=Sort.BOOL)


@dataclass(frozen=True)
class Contract:
    decls: tuple[VarDecl, ...]
    assumption: Expr = TRUE
    initial: Expr = TRUE
    transition: Expr = TRUE

    @property
    def state_vars(self) -> tuple[VarDecl, ...]:
        return tuple(d for d in self.decls if d.kind is Kind.STATE)

    @property
    def input_vars(self) -> tuple[VarDecl, ...]:
        return tuple(d for d in self.decls if d.kind is Kind.INPUT)

    def decl(self, name: str) -> VarDecl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    def __str__(self):
        return format_contract(self)


def sort_of_value(value: Value) -> Sort:
    if isinstance(value, bool):
        return Sort.BOOL
    if isinstance(value, int):
        return Sort.INT
    if isinstance(value, Fraction):
        return Sort.REAL
    raise TypeError(f"not a contract value: {value!r}")


def lit(value: Value) -> Lit:
    return Lit(value, sort=sort_of_value(value))


def conj(*exprs: Expr) -> Expr:
    """Left-folded conjunction; the empty conjunction is ``true``."""
    if not exprs:
        return TRUE
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("and", out, e, sort=Sort.BOOL)
    return out


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Unary):
        return (e.arg,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Ite):
        return (e.cond, e.then, e.orelse)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def variables(e: Expr) -> set[tuple[str, bool]]:
    return {(n.name, n.primed) for n in walk(e) if isinstance(n, Var)}


def transform(e: Expr, leaf: Callable[[Expr], Expr]) -> Expr:
    """Rebuild ``e`` bottom-up, applying ``leaf`` to every Lit and Var."""
    if isinstance(e, (Lit, Var)):
        return leaf(e)
    if isinstance(e, Unary):
        return replace(e, arg=transform(e.arg, leaf))
    if isinstance(e, Binary):
        return replace(e, left=transform(e.left, leaf), right=transform(e.right, leaf))
    if isinstance(e, Ite):
        return replace(
            e,
            cond=transform(e.cond, leaf),
            then=transform(e.then, leaf),
            orelse=transform(e.orelse, leaf),
        )
    raise TypeError(f"unknown node {e!r}")


def substitute(e: Expr, values: dict[tuple[str, bool], Value]) -> Expr:
    """Replace variables ``(name, primed)`` found in ``values`` by literals."""

    def leaf(node):
        if isinstance(node, Var) and (node.name, node.primed) in values:
            return Lit(values[node.name, node.primed], sort=node.sort, pos=node.pos)
        return node

    return transform(e, leaf)


# -- printing ---------------------------------------------------------------

_PREC = {
    "=>": 1,
    "or": 2,
    "and": 3,
    "=": 5, "<>": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6,
    "*": 7, "div": 7, "mod": 7,
}
_ITE, _NOT, _NEG, _ATOM = 0, 4, 8, 9


def _prec(e: Expr) -> int:
    if isinstance(e, Ite):
        return _ITE
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return {"not": _NOT, "-": _NEG}.get(e.op, _ATOM)
    return _ATOM


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format_decimal(value)


def format_decimal(q: Fraction) -> str:
    """Exact decimal text for ``q``; raises if the expansion does not terminate."""
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise ValueError(f"{q} has no finite decimal expansion")
    digits = max(twos, fives, 1)
    scaled = abs(q) * 10**digits
    assert scaled.denominator == 1
    whole, frac = divmod(scaled.numerator, 10**digits)
    text = f"{whole}.{frac:0{digits}d}".rstrip("0")
    if text.endswith("."):
        text += "0"
    return "-" + text if q < 0 else text


def format_expr(e: Expr) -> str:
    return _fmt(e, 0)


def _wrap(e: Expr, ok: bool) -> str:
    text = _fmt(e, 0)
    return text if ok else f"({text})"


def _fmt(e: Expr, _ctx: int) -> str:
    if isinstance(e, Lit):
        return format_value(e.value)
    if isinstance(e, Var):
        return e.name + ("'" if e.primed else "")
    if isinstance(e, Ite):
        return (
            f"if {_fmt(e.cond, 0)} then {_fmt(e.then, 0)} else {_fmt(e.orelse, 0)}"
        )
    if isinstance(e, Unary):
        if e.op == "real":
            return f"real({_fmt(e.arg, 0)})"
        if e.op == "not":
            return "not " + _wrap(e.arg, _prec(e.arg) >= _NOT)
        # a bare "-3" would re-parse as a negative literal
        if isinstance(e.arg, Lit) and not isinstance(e.arg.value, bool) and e.arg.value >= 0:
            return f"-({_fmt(e.arg, 0)})"
        inner = _wrap(e.arg, _prec(e.arg) >= _NEG)
        return "- " + inner if inner.startswith("-") else "-" + inner
    if isinstance(e, Binary):
        p = _PREC[e.op]
        if e.op == "=>":
            left_ok, right_ok = _prec(e.left) > p, _prec(e.right) >= p
        elif p == 5:
            left_ok, right_ok = _prec(e.left) > p, _prec(e.right) > p
        else:
            left_ok, right_ok = _prec(e.left) >= p, _prec(e.right) > p
        return f"{_wrap(e.left, left_ok)} {e.op} {_wrap(e.right, right_ok)}"
    raise TypeError(f"unknown node {e!r}")


def format_contract(c: Contract) -> str:
    lines = [f"{d.kind} {d.name}: {d.sort};" for d in c.decls]
    lines.append(f"assume {format_expr(c.assumption)};")
    lines.append(f"init {format_expr(c.initial)};")
    lines.append(f"trans {format_expr(c.transition)};")
    return "\n".join(lines) + "\n"
