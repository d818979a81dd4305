"""Seeded random contracts over small finite domains, for differential tests."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .oracle import DomainSpec
from .syntax import TRUE, Binary, Contract, Expr, Ite, Kind, Lit, Sort, Unary, Var, VarDecl, conj
from .typecheck import TypedContract, typecheck


@dataclass(frozen=True)
class GenParams:
    num_state: int = 2
    num_input: int = 1
    int_range: tuple[int, int] = (-1, 2)
    expr_depth: int = 2
    bool_ratio: float = 0.35


class _Gen:
    def __init__(self, rng: random.Random, params: GenParams, decls: list[VarDecl]):
        self.rng = rng
        self.p = params
        self.decls = decls

    def pick_var(self, sort: Sort, kinds, primed=False):
        pool = [d for d in self.decls if d.sort is sort and d.kind in kinds]
        if not pool:
            return None
        d = self.rng.choice(pool)
        return Var(d.name, primed and d.kind is Kind.STATE)

    def const(self) -> Expr:
        lo, hi = self.p.int_range
        return Lit(self.rng.randint(lo, hi))

    def int_term(self, depth: int, kinds, primed=False) -> Expr:
        r = self.rng.random()
        if depth <= 0 or r < 0.45:
            v = self.pick_var(Sort.INT, kinds, primed and self.rng.random() < 0.5)
            if v is None or self.rng.random() < 0.25:
                return self.const()
            return v
        if r < 0.8:
            op = self.rng.choice(["+", "-"])
            return Binary(op, self.int_term(depth - 1, kinds, primed), self.int_term(depth - 1, kinds, primed))
        if r < 0.88:
            return Binary("mod", self.int_term(depth - 1, kinds, primed), Lit(self.rng.choice([2, 3])))
        if r < 0.94:
            return Unary("-", self.int_term(depth - 1, kinds, primed))
        return Ite(self.atom(depth - 1, kinds, primed), self.int_term(depth - 1, kinds, primed),
                   self.int_term(depth - 1, kinds, primed))

    def atom(self, depth: int, kinds, primed=False) -> Expr:
        if self.rng.random() < 0.3:
            v = self.pick_var(Sort.BOOL, kinds, primed and self.rng.random() < 0.5)
            if v is not None:
                return v
        op = self.rng.choice(["=", "<>", "<", "<=", ">="])
        return Binary(op, self.int_term(depth, kinds, primed), self.int_term(depth, kinds, primed))

    def formula(self, depth: int, kinds, primed=False) -> Expr:
        if depth <= 0 or self.rng.random() < 0.4:
            return self.atom(depth, kinds, primed)
        r = self.rng.random()
        if r < 0.15:
            return Unary("not", self.formula(depth - 1, kinds, primed))
        op = "and" if r < 0.45 else "or" if r < 0.75 else "=>"
        return Binary(op, self.formula(depth - 1, kinds, primed), self.formula(depth - 1, kinds, primed))

    def update(self, d: VarDecl) -> Expr:
        """A constraint on the next value of state variable ``d``."""
        pre = (Kind.STATE, Kind.INPUT)
        depth = self.p.expr_depth
        if d.sort is Sort.BOOL:
            rhs = self.formula(depth - 1, pre)
            rel = Binary("=", Var(d.name, True), rhs)
        else:
            op = self.rng.choice(["=", "=", "<=", ">=", "<>"])
            rel = Binary(op, Var(d.name, True), self.int_term(depth, pre))
        if self.rng.random() < 0.5:
            return Binary("=>", self.formula(depth - 1, pre), rel)
        return rel


def random_contract(seed: int, params: GenParams = GenParams()) -> tuple[TypedContract, DomainSpec]:
    """A well-typed Bool/Int contract and a finite domain for it; deterministic in ``seed``."""
    rng = random.Random(seed)
    decls = []
    for k in range(params.num_state):
        sort = Sort.BOOL if rng.random() < params.bool_ratio else Sort.INT
        decls.append(VarDecl(f"x{k}", sort, Kind.STATE))
    for k in range(params.num_input):
        sort = Sort.BOOL if rng.random() < params.bool_ratio else Sort.INT
        decls.append(VarDecl(f"i{k}", sort, Kind.INPUT))
    gen = _Gen(rng, params, decls)
    depth = params.expr_depth

    assumption = TRUE if rng.random() < 0.5 else gen.formula(depth - 1, (Kind.STATE, Kind.INPUT))
    initial = TRUE if rng.random() < 0.3 else gen.formula(depth - 1, (Kind.STATE,))
    rules = [gen.update(d) for d in decls if d.kind is Kind.STATE and rng.random() < 0.8]
    if rng.random() < 0.35:
        rules.append(gen.formula(depth - 1, (Kind.STATE, Kind.INPUT), primed=True))
    transition = conj(*rules) if rules else gen.formula(depth, (Kind.STATE, Kind.INPUT), primed=True)

    contract = typecheck(Contract(tuple(decls), assumption, initial, transition))
    lo, hi = params.int_range
    dom = DomainSpec({d.name: (lo, hi) for d in decls if d.sort is Sort.INT})
    return contract, dom


def corpus(seeds, params: GenParams = GenParams()):
    for seed in seeds:
        yield seed, *random_contract(seed, params)
