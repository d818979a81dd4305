"""Unrolling a contract into closed one-alternation queries.

Every query has the shape ``exists x. (c1 and ... and ck) and forall y. not body``.
The base and extend queries are the negations of the two checks of the
realizability loop, so a satisfiable query means the check failed.

Indexing: states ``s$0 .. s$n``, inputs ``i$1 .. i$(n+1)``; the transitional
guarantee of step ``k`` relates ``s$(k-1)``, ``i$k`` and ``s$k``.  The
universally quantified successor is ``s$post``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .syntax import TRUE, Contract, Expr, Kind, Lit, Sort, Unary, Var, conj, transform

POST = None
_FORBID = object()


@dataclass(frozen=True)
class StepVar:
    name: str
    sort: Sort
    kind: Kind
    index: Optional[int]  # None for the universally quantified successor

    @property
    def rendered(self) -> str:
        return f"{self.name}${'post' if self.index is None else self.index}"

    def __str__(self):
        return self.rendered


@dataclass(frozen=True)
class QueryFormula:
    kind: str  # "base", "extend", "initial", "successor"
    depth: int
    exists: tuple[StepVar, ...]
    matrix: tuple[Expr, ...]
    forall: tuple[StepVar, ...] = ()
    body: Optional[Expr] = None  # the negated transitional guarantee, under forall

    @property
    def symbols(self) -> dict[str, StepVar]:
        return {v.rendered: v for v in self.exists}

    @property
    def matrix_expr(self) -> Expr:
        return conj(*self.matrix)


def step_vars(decls, index) -> tuple[StepVar, ...]:
    return tuple(StepVar(d.name, d.sort, d.kind, index) for d in decls)


def instantiate(e: Expr, contract: Contract, state: int, inp: Optional[int] = None,
                nxt=_FORBID) -> Expr:
    """Rename contract variables to step variables.

    Unprimed state variables get index ``state``, inputs ``inp`` and primed
    state variables ``nxt`` (``POST`` for the successor).
    """
    kinds = {d.name: d.kind for d in contract.decls}

    def leaf(node):
        if not isinstance(node, Var):
            return node
        if node.primed:
            if nxt is _FORBID:
                raise ValueError(f"unexpected primed variable {node.name}'")
            index = nxt
        elif kinds[node.name] is Kind.INPUT:
            if inp is None:
                raise ValueError(f"unexpected input variable {node.name}")
            index = inp
        else:
            index = state
        label = "post" if index is None else index
        return replace(node, name=f"{node.name}${label}", primed=False)

    return transform(e, leaf)


def assumption_at(contract: Contract, k: int) -> Expr:
    """A(s$(k-1), i$k)."""
    return instantiate(contract.assumption, contract, k - 1, k)


def transition_at(contract: Contract, k: int, post: bool = False) -> Expr:
    """G_T(s$(k-1), i$k, s$k); with ``post`` the successor is ``s$post``."""
    return instantiate(contract.transition, contract, k - 1, k, POST if post else k)


def initial_at0(contract: Contract) -> Expr:
    return instantiate(contract.initial, contract, 0)


def path_conjuncts(contract: Contract, n: int) -> tuple[Expr, ...]:
    if n == 0:
        return (TRUE,)
    out = []
    for k in range(1, n + 1):
        out.append(assumption_at(contract, k))
        out.append(transition_at(contract, k))
    return tuple(out)


def path_increment(contract: Contract, n: int) -> tuple[Expr, ...]:
    """The conjuncts added to the path constraint when going from n-1 to n."""
    if n == 0:
        return (TRUE,)
    return (assumption_at(contract, n), transition_at(contract, n))


def build_path_constraint(contract: Contract, n: int) -> Expr:
    if n < 0:
        raise ValueError("depth must be >= 0")
    return conj(*path_conjuncts(contract, n))


def prefix_vars(contract: Contract, n: int) -> tuple[StepVar, ...]:
    """s$0, i$1, s$1, i$2, ..., s$n, i$(n+1) in declaration order per step."""
    out = []
    for k in range(n + 1):
        out.extend(step_vars(contract.state_vars, k))
        out.extend(step_vars(contract.input_vars, k + 1))
    return tuple(out)


def stuck_tail(contract: Contract, n: int) -> tuple[Expr, tuple[StepVar, ...], Expr]:
    """A(s$n, i$(n+1)) and the pieces of ``forall s$post. not G_T(s$n, i$(n+1), s$post)``."""
    body = Unary("not", transition_at(contract, n + 1, post=True), sort=Sort.BOOL)
    return assumption_at(contract, n + 1), step_vars(contract.state_vars, POST), body


def build_extend_negation(contract: Contract, n: int) -> QueryFormula:
    if n < 0:
        raise ValueError("depth must be >= 0")
    stuck_a, post, body = stuck_tail(contract, n)
    return QueryFormula(
        "extend",
        n,
        exists=prefix_vars(contract, n),
        matrix=path_conjuncts(contract, n) + (stuck_a,),
        forall=post,
        body=body,
    )


def build_base_negation(contract: Contract, n: int) -> QueryFormula:
    q = build_extend_negation(contract, n)
    return replace(q, kind="base", matrix=q.matrix + (initial_at0(contract),))


def build_initial_sat(contract: Contract) -> QueryFormula:
    return QueryFormula(
        "initial", 0, exists=step_vars(contract.state_vars, 0), matrix=(initial_at0(contract),)
    )


def build_successor_query(contract: Contract, state: dict, inp: dict) -> QueryFormula:
    """exists s$post. G_T(state, inp, s$post) with the pre-state and input fixed."""
    values = {**state, **inp}

    def leaf(node):
        if isinstance(node, Var) and not node.primed:
            return Lit(values[node.name], sort=node.sort)
        if isinstance(node, Var):
            return replace(node, name=f"{node.name}$post", primed=False)
        return node

    post = step_vars(contract.state_vars, POST)
    return QueryFormula("successor", 0, exists=post, matrix=(transform(contract.transition, leaf),))


def simplify_query(q: QueryFormula) -> QueryFormula:
    """Drop literal ``true`` conjuncts from the matrix."""
    kept = tuple(c for c in q.matrix if c != TRUE)
    return replace(q, matrix=kept)
