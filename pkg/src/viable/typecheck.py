"""Scope and sort checking for contracts.

The three sections have different signatures: the assumption sees the current
state and input, the initial guarantee sees the state only, and the
transitional guarantee additionally sees primed (next) state variables.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

from .parser import ContractError, parse_contract
from .syntax import (
    Binary,
    Contract,
    Expr,
    Ite,
    Kind,
    Lit,
    Sort,
    Unary,
    Var,
    VarDecl,
    format_expr,
    sort_of_value,
    walk,
)

log = logging.getLogger(__name__)


class TypeCheckError(ContractError):
    """A contract violates a scope or sort rule.

    ``rule`` is a short stable code such as ``"primed-input"`` and ``node``
    the offending expression (None for declaration-level errors).
    """

    def __init__(self, message: str, rule: str, node: Optional[Expr] = None):
        where = ""
        if node is not None and node.pos is not None:
            where = f"{node.pos[0]}:{node.pos[1]}: "
        super().__init__(f"{where}{message}")
        self.rule = rule
        self.node = node


@dataclass(frozen=True)
class TypedContract(Contract):
    """A contract whose expressions carry a sort on every node."""

    warnings: tuple[str, ...] = field(default=(), compare=False)


_SECTION = {"assume": "assumption", "init": "initial guarantee", "trans": "transitional guarantee"}


def typecheck(contract: Contract) -> TypedContract:
    decls = _check_decls(contract.decls)
    warnings: list[str] = []
    parts = {}
    for section, expr in (
        ("assume", contract.assumption),
        ("init", contract.initial),
        ("trans", contract.transition),
    ):
        typed = _Checker(decls, section, warnings).check(expr)
        if typed.sort is not Sort.BOOL:
            raise TypeCheckError(
                f"{_SECTION[section]} must be bool, got {typed.sort}", "sort-mismatch", expr
            )
        parts[section] = typed
    for w in warnings:
        log.warning(w)
    return TypedContract(
        contract.decls,
        assumption=parts["assume"],
        initial=parts["init"],
        transition=parts["trans"],
        warnings=tuple(warnings),
    )


def load_contract(text: str) -> TypedContract:
    return typecheck(parse_contract(text))


def _check_decls(decls: tuple[VarDecl, ...]) -> dict[str, VarDecl]:
    table: dict[str, VarDecl] = {}
    for d in decls:
        if "$" in d.name or "'" in d.name:
            raise TypeCheckError(f"invalid variable name {d.name!r}", "invalid-name")
        if d.name in table:
            raise TypeCheckError(f"variable {d.name!r} declared twice", "duplicate-declaration")
        table[d.name] = d
    if not any(d.kind is Kind.STATE for d in decls):
        raise TypeCheckError("a contract needs at least one state variable", "no-state-variable")
    return table


def _is_constant(e: Expr) -> bool:
    return not any(isinstance(n, Var) for n in walk(e))


class _Checker:
    def __init__(self, decls: dict[str, VarDecl], section: str, warnings: list[str]):
        self.decls = decls
        self.section = section
        self.warnings = warnings

    def fail(self, message, rule, node):
        raise TypeCheckError(message, rule, node)

    def check(self, e: Expr) -> Expr:
        if isinstance(e, Lit):
            return replace(e, sort=sort_of_value(e.value))
        if isinstance(e, Var):
            return self.var(e)
        if isinstance(e, Unary):
            return self.unary(e)
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Ite):
            cond = self.check(e.cond)
            then = self.check(e.then)
            orelse = self.check(e.orelse)
            if cond.sort is not Sort.BOOL:
                self.fail("if-condition must be bool", "sort-mismatch", e)
            if then.sort is not orelse.sort:
                self.fail(
                    f"if-branches have different sorts ({then.sort}, {orelse.sort})",
                    "sort-mismatch",
                    e,
                )
            return replace(e, cond=cond, then=then, orelse=orelse, sort=then.sort)
        raise TypeError(f"unknown node {e!r}")

    def var(self, e: Var) -> Expr:
        d = self.decls.get(e.name)
        if d is None:
            self.fail(f"unknown variable {e.name!r}", "unknown-variable", e)
        if e.primed and d.kind is Kind.INPUT:
            self.fail(f"primed input {e.name}'", "primed-input", e)
        if e.primed and self.section == "init":
            self.fail(f"prime in initial guarantee: {e.name}'", "prime-in-init", e)
        if e.primed and self.section == "assume":
            self.fail(f"prime in assumption: {e.name}'", "prime-in-assume", e)
        if d.kind is Kind.INPUT and self.section == "init":
            self.fail(f"input {e.name!r} in initial guarantee", "input-in-init", e)
        return replace(e, sort=d.sort)

    def unary(self, e: Unary) -> Expr:
        arg = self.check(e.arg)
        if e.op == "not":
            want, out = (Sort.BOOL,), Sort.BOOL
        elif e.op == "-":
            want, out = (Sort.INT, Sort.REAL), arg.sort
        elif e.op == "real":
            want, out = (Sort.INT,), Sort.REAL
        else:
            raise TypeError(f"unknown unary operator {e.op!r}")
        if arg.sort not in want:
            self.fail(f"operator {e.op!r} does not apply to {arg.sort}", "sort-mismatch", e)
        return replace(e, arg=arg, sort=out)

    def binary(self, e: Binary) -> Expr:
        left = self.check(e.left)
        right = self.check(e.right)
        ls, rs = left.sort, right.sort
        op = e.op
        if op in ("and", "or", "=>"):
            ok, out = ls is rs is Sort.BOOL, Sort.BOOL
        elif op in ("=", "<>"):
            ok, out = ls is rs, Sort.BOOL
        elif op in ("<", "<=", ">", ">="):
            ok, out = ls is rs and ls in (Sort.INT, Sort.REAL), Sort.BOOL
        elif op in ("+", "-", "*"):
            ok, out = ls is rs and ls in (Sort.INT, Sort.REAL), ls
        elif op in ("div", "mod"):
            ok, out = ls is rs is Sort.INT, Sort.INT
        else:
            raise TypeError(f"unknown binary operator {op!r}")
        if not ok:
            self.fail(f"sort mismatch: {ls} {op} {rs}", "sort-mismatch", e)
        nonlinear = (
            op == "*" and not _is_constant(left) and not _is_constant(right)
        ) or (op in ("div", "mod") and not _is_constant(right))
        if nonlinear:
            where = f" at {e.pos[0]}:{e.pos[1]}" if e.pos else ""
            self.warnings.append(
                f"nonlinear term{where}: {format_expr(e)} (the solver may answer unknown)"
            )
        return replace(e, left=left, right=right, sort=out)
