"""Exact realizability on finite domains, by exhaustive enumeration.

Restricting every Int variable to a finite range turns the contract into a
finite safety game.  On it the coinductive viability predicate is a greatest
fixpoint, realizability is decidable, and each check of the unrolling
algorithm (including the unsimplified base check, which is out of reach for
SMT solvers) can be evaluated directly.  This module is the ground truth the
engine is tested against.
"""

from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .evaluate import eval_expr, transition_env
from .syntax import Binary, Contract, Expr, Sort, Var, VarDecl, conj, lit
from .typecheck import TypedContract, typecheck

StateTuple = tuple
StateLike = Union[StateTuple, Mapping[str, object]]


class OracleError(Exception):
    pass


class DomainTooLarge(OracleError):
    pass


class RealVariableUnsupported(OracleError):
    pass


class NotRealizable(OracleError):
    pass


class DomainSpec:
    """Finite carriers: an inclusive range per Int variable; Bool is implicit.

    ``cap`` bounds |states| * |inputs|, ``depth_cap`` bounds the unrolling
    depth accepted by the per-depth oracles.
    """

    def __init__(self, ranges: Mapping[str, tuple[int, int]], cap: int = 10**6, depth_cap: int = 6):
        for name, (lo, hi) in ranges.items():
            if lo > hi:
                raise ValueError(f"empty range for {name}: {lo}..{hi}")
        self._ranges = tuple(sorted((n, int(lo), int(hi)) for n, (lo, hi) in ranges.items()))
        self.cap = cap
        self.depth_cap = depth_cap

    @property
    def ranges(self) -> dict[str, tuple[int, int]]:
        return {n: (lo, hi) for n, lo, hi in self._ranges}

    def carrier(self, decl: VarDecl) -> tuple:
        if decl.sort is Sort.BOOL:
            return (False, True)
        if decl.sort is Sort.REAL:
            raise RealVariableUnsupported(f"real variable {decl.name!r} has no finite carrier")
        bounds = self.ranges.get(decl.name)
        if bounds is None:
            raise OracleError(f"no domain given for int variable {decl.name!r}")
        return tuple(range(bounds[0], bounds[1] + 1))

    def __eq__(self, other):
        return isinstance(other, DomainSpec) and (self._ranges, self.cap, self.depth_cap) == (
            other._ranges, other.cap, other.depth_cap)

    def __hash__(self):
        return hash((self._ranges, self.cap, self.depth_cap))

    def __repr__(self):
        return f"DomainSpec({self.ranges!r})"

    def annotation(self) -> str:
        body = ", ".join(f"{n}: {lo}..{hi}" for n, lo, hi in self._ranges)
        return f"-- @oracle-domain {body}"


_ANNOTATION = re.compile(r"^\s*--\s*@oracle-domain\b(.*)$", re.MULTILINE)
_RANGE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_.]*)\s*:\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def parse_domain_annotation(text: str) -> Optional[DomainSpec]:
    """Collect ``-- @oracle-domain name: lo..hi, ...`` lines from contract source."""
    matches = _ANNOTATION.findall(text)
    if not matches:
        return None
    ranges = {}
    for body in matches:
        for item in filter(str.strip, body.split(",")):
            m = _RANGE.match(item)
            if not m:
                raise OracleError(f"bad @oracle-domain entry {item.strip()!r}")
            ranges[m.group(1)] = (int(m.group(2)), int(m.group(3)))
    return DomainSpec(ranges)


@dataclass(frozen=True)
class TransitionSystemTable:
    """An explicit finite transition system: initial states and (s, i, s') triples."""

    initial: frozenset
    transitions: frozenset

    def successors(self, s, i) -> list:
        return [t for (u, j, t) in self.transitions if u == s and j == i]


class FiniteGame:
    """The contract evaluated over every state/input combination of a domain."""

    def __init__(self, contract: Contract, dom: DomainSpec):
        self.contract = contract
        self.dom = dom
        self.state_decls = contract.state_vars
        self.input_decls = contract.input_vars
        state_carriers = [dom.carrier(d) for d in self.state_decls]
        input_carriers = [dom.carrier(d) for d in self.input_decls]
        n_states = _product(len(c) for c in state_carriers)
        n_inputs = _product(len(c) for c in input_carriers)
        if n_states * n_inputs > dom.cap:
            raise DomainTooLarge(f"{n_states} states x {n_inputs} inputs exceeds cap {dom.cap}")
        # itertools.product over sorted carriers gives the lexicographic order
        self.states: list[StateTuple] = list(itertools.product(*state_carriers))
        self.inputs: list[tuple] = list(itertools.product(*input_carriers))
        self.index = {s: k for k, s in enumerate(self.states)}
        self._build_tables()
        self._viable_memo: dict[tuple[int, int], bool] = {}

    def _env(self, s, i=None, t=None):
        state = dict(zip((d.name for d in self.state_decls), s))
        inp = dict(zip((d.name for d in self.input_decls), i or ()))
        nxt = None if t is None else dict(zip((d.name for d in self.state_decls), t))
        return transition_env(state, inp, nxt)

    def _build_tables(self):
        S, I = len(self.states), len(self.inputs)
        c = self.contract
        self.init = np.zeros(S, dtype=bool)
        self.assume = np.zeros((S, I), dtype=bool)
        self.trans = np.zeros((S, I, S), dtype=bool)
        for a, s in enumerate(self.states):
            self.init[a] = bool(eval_expr(c.initial, self._env(s)))
            for b, i in enumerate(self.inputs):
                self.assume[a, b] = bool(eval_expr(c.assumption, self._env(s, i)))
                for d, t in enumerate(self.states):
                    self.trans[a, b, d] = bool(eval_expr(c.transition, self._env(s, i, t)))
        # stuck_free[s]: every valid input has some successor
        self.stuck_free = np.all(~self.assume | self.trans.any(axis=2), axis=1)
        # step[s, t]: some valid input lets s move to t
        self.step = np.any(self.assume[:, :, None] & self.trans, axis=1)

    def state_index(self, s: StateLike) -> int:
        if isinstance(s, Mapping):
            s = tuple(s[d.name] for d in self.state_decls)
        return self.index[tuple(s)]

    def state_dict(self, s: StateTuple) -> dict:
        return dict(zip((d.name for d in self.state_decls), s))

    def input_dict(self, i: tuple) -> dict:
        return dict(zip((d.name for d in self.input_decls), i))

    def _check_depth(self, n: int):
        if n < 0 or n > self.dom.depth_cap:
            raise OracleError(f"depth {n} outside 0..{self.dom.depth_cap}")

    # -- viability

    def controllable(self, target: np.ndarray) -> np.ndarray:
        """States where every valid input has a successor inside ``target``."""
        ok = (self.trans & target[None, None, :]).any(axis=2)
        return np.all(~self.assume | ok, axis=1)

    def viable(self) -> np.ndarray:
        """Greatest fixpoint of ``controllable``, iterated from all states."""
        v = np.ones(len(self.states), dtype=bool)
        for _ in range(len(self.states) + 1):
            nxt = self.controllable(v)
            if np.array_equal(nxt, v):
                return v
            v = nxt
        raise AssertionError("fixpoint iteration did not stabilise")

    def viable_n(self, s: int, n: int) -> bool:
        """Finite viability by direct recursion on the alternating quantifiers."""
        if n == 0:
            return True
        key = (s, n)
        memo = self._viable_memo
        if key not in memo:
            memo[key] = all(
                not self.assume[s, b]
                or any(self.trans[s, b, t] and self.viable_n(t, n - 1) for t in range(len(self.states)))
                for b in range(len(self.inputs))
            )
        return memo[key]

    def reach_exactly(self, s: int, n: int) -> np.ndarray:
        """End states of valid paths of exactly n steps from s."""
        frontier = np.zeros(len(self.states), dtype=bool)
        frontier[s] = True
        for _ in range(n):
            frontier = self.step[frontier].any(axis=0)
        return frontier

    def extend_n(self, s: int, n: int) -> bool:
        return bool(np.all(self.stuck_free[self.reach_exactly(s, n)]))

    # -- the algorithm's checks

    def base_check(self, n: int) -> bool:
        self._check_depth(n)
        return any(self.init[s] and self.viable_n(s, n) for s in range(len(self.states)))

    def extend_check(self, n: int) -> bool:
        self._check_depth(n)
        return all(self.extend_n(s, n) for s in range(len(self.states)))

    def base_check_simplified(self, n: int) -> bool:
        self._check_depth(n)
        return all(not self.init[s] or self.extend_n(s, n) for s in range(len(self.states)))

    def realizable(self) -> bool:
        return bool(np.any(self.init & self.viable()))

    # -- realizations

    def synthesize(self) -> TransitionSystemTable:
        v = self.viable()
        candidates = np.flatnonzero(self.init & v)
        if candidates.size == 0:
            raise NotRealizable("no initial state is viable")
        s0 = self.states[candidates[0]]
        triples = frozenset(
            (self.states[a], self.inputs[b], self.states[d])
            for a, b, d in zip(*np.nonzero(self.trans & v[None, None, :]))
        )
        table = TransitionSystemTable(frozenset({s0}), triples)
        problems = self.audit(table)
        if problems:
            raise AssertionError(f"synthesized system fails its audit: {problems}")
        return table

    def reachable(self, table: TransitionSystemTable) -> set:
        """States reachable from an initial state along assumption-respecting steps."""
        input_index = {i: b for b, i in enumerate(self.inputs)}
        seen = set(table.initial)
        frontier = list(seen)
        by_source: dict = {}
        for (s, i, t) in table.transitions:
            by_source.setdefault(s, []).append((i, t))
        while frontier:
            s = frontier.pop()
            a = self.index[s]
            for i, t in by_source.get(s, ()):
                if self.assume[a, input_index[i]] and t not in seen:
                    seen.add(t)
                    frontier.append(t)
        return seen

    def audit(self, table: TransitionSystemTable) -> list[str]:
        """The realization conditions ``table`` violates (empty if it realizes the contract)."""
        problems = []
        input_index = {i: b for b, i in enumerate(self.inputs)}
        if any(not self.init[self.index[s]] for s in table.initial):
            problems.append("1: an initial state violates the initial guarantee")
        reach = self.reachable(table)
        for (s, i, t) in table.transitions:
            a, b = self.index[s], input_index[i]
            if s in reach and self.assume[a, b] and not self.trans[a, b, self.index[t]]:
                problems.append(f"2: transition {s} --{i}--> {t} violates the transitional guarantee")
                break
        if not table.initial:
            problems.append("3: no initial state")
        moves = {(s, i) for (s, i, _t) in table.transitions}
        for s in reach:
            a = self.index[s]
            for b, i in enumerate(self.inputs):
                if self.assume[a, b] and (s, i) not in moves:
                    problems.append(f"4: reachable state {s} has no transition on valid input {i}")
                    break
            else:
                continue
            break
        return problems


def _product(sizes: Iterable[int]) -> int:
    out = 1
    for s in sizes:
        out *= s
    return out


@functools.lru_cache(maxsize=128)
def finite_game(contract: Contract, dom: DomainSpec) -> FiniteGame:
    return FiniteGame(contract, dom)


# -- module-level operations --------------------------------------------------


def enumerate_viable(contract: Contract, dom: DomainSpec) -> frozenset:
    """Viable states as value tuples in state-declaration order."""
    g = finite_game(contract, dom)
    return frozenset(s for s, ok in zip(g.states, g.viable()) if ok)


def oracle_realizable(contract: Contract, dom: DomainSpec) -> bool:
    return finite_game(contract, dom).realizable()


def oracle_viable_n(contract: Contract, dom: DomainSpec, s: StateLike, n: int) -> bool:
    g = finite_game(contract, dom)
    g._check_depth(n)
    return g.viable_n(g.state_index(s), n)


def oracle_extend_n(contract: Contract, dom: DomainSpec, s: StateLike, n: int) -> bool:
    g = finite_game(contract, dom)
    g._check_depth(n)
    return g.extend_n(g.state_index(s), n)


def oracle_base_check(contract: Contract, dom: DomainSpec, n: int) -> bool:
    return finite_game(contract, dom).base_check(n)


def oracle_extend_check(contract: Contract, dom: DomainSpec, n: int) -> bool:
    return finite_game(contract, dom).extend_check(n)


def oracle_base_check_simplified(contract: Contract, dom: DomainSpec, n: int) -> bool:
    return finite_game(contract, dom).base_check_simplified(n)


def synthesize_realization(contract: Contract, dom: DomainSpec) -> TransitionSystemTable:
    return finite_game(contract, dom).synthesize()


def audit_realization(contract: Contract, dom: DomainSpec, table: TransitionSystemTable) -> list[str]:
    return finite_game(contract, dom).audit(table)


def restrict_to_domain(contract: Contract, dom: DomainSpec) -> TypedContract:
    """The same contract over unbounded sorts, with the domain built in.

    States and inputs outside the domain are made invalid (assumption), and
    initial and next states are required to lie inside it.  The result is
    realizable over Int exactly when the original is realizable on ``dom``,
    and each unrolled query has the same truth value as its finite version.
    """

    def inside(decls, primed=False) -> list[Expr]:
        out = []
        for d in decls:
            if d.sort is Sort.REAL:
                raise RealVariableUnsupported(f"real variable {d.name!r} has no finite carrier")
            if d.sort is Sort.INT:
                lo, hi = dom.ranges[d.name]
                v = Var(d.name, primed)
                out.append(Binary("<=", lit(lo), v))
                out.append(Binary("<=", v, lit(hi)))
        return out

    states, inputs = contract.state_vars, contract.input_vars
    restricted = Contract(
        contract.decls,
        assumption=conj(contract.assumption, *inside(states), *inside(inputs)),
        initial=conj(contract.initial, *inside(states)),
        transition=conj(contract.transition, *inside(states, primed=True)),
    )
    return typecheck(restricted)
