"""Cross-checks between the engine, the finite-domain oracle and the theory.

Three harnesses live here, shared by the test suite and the ``corpus``
command:

* ``theorem_violations`` checks the lemmas relating finite viability, the
  one-step extension and the two base checks, exhaustively on one game.
* ``engine_vs_oracle`` runs the SMT engine on a domain-restricted contract
  and compares its verdict with the oracle's.
* ``incremental_vs_monolithic`` compares verdict sequences from one
  incremental session against fresh solver processes per depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import smtlib
from .engine import (
    CheckPipeline,
    CounterexampleError,
    EngineOptions,
    Realizable,
    Unknown,
    Unrealizable,
    check_realizability,
    confirm_stuck,
)
from .evaluate import ReplayFailure, replay_trace
from .oracle import DomainSpec, FiniteGame, TransitionSystemTable, finite_game, restrict_to_domain
from .smtlib import Status
from .syntax import Contract
from .unroll import build_base_negation, build_extend_negation

# -- theorem checks on one finite game ---------------------------------------


def theorem_violations(game: FiniteGame, monotone_depth: int = 4, lemma_depth: int = 3) -> list[str]:
    """Every instance where a lemma of the unrolling theory fails on ``game``.

    Checked exhaustively over all states, inputs and depths up to the given
    bounds.  An empty list means the game agrees with the theory.
    """
    out: list[str] = []
    S = len(game.states)
    viable = game.viable()

    # the greatest fixpoint really is a fixpoint
    if not np.array_equal(game.controllable(viable), viable):
        out.append("viable set is not a fixpoint")

    for s in range(S):
        for n in range(monotone_depth + 1):
            if game.viable_n(s, n + 1) and not game.viable_n(s, n):
                out.append(f"viable_{n + 1} does not imply viable_{n} at {game.states[s]}")
            if viable[s] and not game.viable_n(s, n):
                out.append(f"viable does not imply viable_{n} at {game.states[s]}")

    for n in range(lemma_depth + 1):
        viable_n = np.array([game.viable_n(t, n) for t in range(S)])
        for s in range(S):
            if not (game.extend_n(s, n) and viable_n[s]):
                continue
            if not game.viable_n(s, n + 1):
                out.append(f"step-up fails at {game.states[s]}, n={n}")
            for b in range(len(game.inputs)):
                if game.assume[s, b] and not (game.trans[s, b] & viable_n).any():
                    out.append(f"shift fails at {game.states[s]}, input {game.inputs[b]}, n={n}")

    has_initial = bool(game.init.any())
    for n in range(lemma_depth + 1):
        prefix_ok = all(game.base_check_simplified(k) for k in range(n + 1))
        if has_initial and prefix_ok and not game.base_check(n):
            out.append(f"simplified base checks through {n} hold but the base check at {n} fails")

    out.extend(_realization_violations(game))
    return out


def _realization_violations(game: FiniteGame) -> list[str]:
    """Both directions of 'realizable iff some initial state is viable'."""
    out = []
    claimed = game.realizable()
    if claimed:
        table = game.synthesize()
        out.extend(f"synthesized realization: {p}" for p in game.audit(table))
    small = len(game.states) <= 10
    found = _brute_force_realization(game) is not None if small else None
    if small and found != claimed:
        out.append(f"viable-initial-state test says {claimed}, subset search says {found}")
    return out


def _brute_force_realization(game: FiniteGame, max_states: int = 10) -> Optional[TransitionSystemTable]:
    """Search every state subset for the reachable set of a realization.

    If a realization exists, its assumption-reachable states form a set R
    that contains an initial state and in which every valid input has a
    successor inside R.  Conversely any such R yields a realization (start
    in the initial state, move within R).  Games with more than
    ``max_states`` states are skipped (None).
    """
    S = len(game.states)
    if S > max_states:
        return None
    for bits in range(1, 1 << S):
        member = np.array([(bits >> k) & 1 for k in range(S)], dtype=bool)
        starts = np.flatnonzero(member & game.init)
        if starts.size == 0 or not np.all(game.controllable(member)[member]):
            continue
        triples = frozenset(
            (game.states[a], game.inputs[b], game.states[d])
            for a, b, d in zip(*np.nonzero(game.trans & member[:, None, None] & member[None, None, :]))
        )
        table = TransitionSystemTable(frozenset({game.states[starts[0]]}), triples)
        if not game.audit(table):
            return table
    return None


# -- engine against oracle ---------------------------------------------------


@dataclass
class DifferentialRecord:
    seed: Optional[int]
    engine: str  # "realizable", "unrealizable", "unknown"
    depth: int
    oracle: bool
    violations: list[str] = field(default_factory=list)


def engine_vs_oracle(contract: Contract, dom: DomainSpec, opts: EngineOptions,
                     seed: Optional[int] = None) -> DifferentialRecord:
    """Run the engine on the domain-restricted contract and compare with the oracle.

    A Realizable answer on an oracle-unrealizable contract is a violation,
    and so is an Unrealizable trace that fails replay or whose final state
    has a successor on the stuck input.
    """
    oracle = finite_game(contract, dom).realizable()
    restricted = restrict_to_domain(contract, dom)
    violations = []
    try:
        result = check_realizability(restricted, opts)
    except CounterexampleError as exc:
        return DifferentialRecord(seed, "error", -1, oracle, [f"invalid counterexample: {exc}"])
    if isinstance(result, Realizable):
        kind, depth = "realizable", result.depth
        if not oracle:
            violations.append(f"engine says realizable at n={depth}, oracle says unrealizable")
    elif isinstance(result, Unrealizable):
        kind, depth = "unrealizable", result.depth
        if result.trace is not None:
            try:
                replay_trace(restricted, result.trace)
            except ReplayFailure as exc:
                violations.append(f"trace does not replay: {exc}")
            else:
                stuck = confirm_stuck(restricted, result.trace, opts.solver_command, opts.per_check_timeout)
                if stuck is False:
                    violations.append("trace end state has a successor")
        elif finite_game(contract, dom).init.any():
            violations.append("no-initial-state verdict, but the oracle finds an initial state")
    else:
        assert isinstance(result, Unknown)
        kind, depth = "unknown", result.base_depth_reached
    return DifferentialRecord(seed, kind, depth, oracle, violations)


def query_agreement(contract: Contract, dom: DomainSpec, max_n: int = 3,
                    solver: Optional[Sequence[str]] = None, timeout: float = 5.0) -> list[str]:
    """Compare each base/extend query's solver status with the oracle's answer.

    The base-negation query is satisfiable exactly when the simplified base
    check fails, and the extend-negation query exactly when the extend check
    fails.  Undecided solver answers are skipped.
    """
    game = finite_game(contract, dom)
    restricted = restrict_to_domain(contract, dom)
    out = []
    for n in range(max_n + 1):
        for kind, build, holds in (
            ("base", build_base_negation, game.base_check_simplified(n)),
            ("extend", build_extend_negation, game.extend_check(n)),
        ):
            v = smtlib.check_query(build(restricted, n), solver, timeout)
            if v.decided and (v.status is Status.SAT) == holds:
                out.append(f"{kind} n={n}: solver {v.status.value}, oracle check {'holds' if holds else 'fails'}")
    return out


# -- incremental sessions against fresh processes ----------------------------


def incremental_statuses(contract: Contract, kind: str, depths: int,
                         solver: Optional[Sequence[str]] = None, timeout: float = 5.0) -> list[Status]:
    """Statuses of the ``kind`` query at depths 0..depths, using the engine's
    incremental pipeline (one session, push/pop per depth)."""
    opts = EngineOptions(solver=tuple(solver) if solver else None, per_check_timeout=timeout)
    pipe = CheckPipeline(contract, kind, opts)
    try:
        return [pipe.check(n, timeout).status for n in range(depths + 1)]
    finally:
        pipe.close()


def monolithic_statuses(contract: Contract, kind: str, depths: int,
                        solver: Optional[Sequence[str]] = None, timeout: float = 5.0) -> list[Status]:
    build = build_base_negation if kind == "base" else build_extend_negation
    return [smtlib.check_query(build(contract, n), solver, timeout).status for n in range(depths + 1)]


def incremental_vs_monolithic(contract: Contract, depths: int = 3,
                              solver: Optional[Sequence[str]] = None,
                              timeout: float = 5.0) -> dict[str, tuple[list[Status], list[Status]]]:
    return {
        kind: (
            incremental_statuses(contract, kind, depths, solver, timeout),
            monolithic_statuses(contract, kind, depths, solver, timeout),
        )
        for kind in ("base", "extend")
    }
