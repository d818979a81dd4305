"""Realizability checking for assume/guarantee contracts over Bool, Int and Real.

Typical use::

    from viable import load_contract, check_realizability

    contract = load_contract(open("counter.ctr").read())
    result = check_realizability(contract)

The result is ``Realizable(n)``, ``Unrealizable(n, trace)`` or
``Unknown(base_depth_reached, reason)``.  Queries are answered by an external
SMT-LIB 2 solver process (``z3 -in`` unless ``VIABLE_SOLVER`` says otherwise).
"""

from .engine import (
    CounterexampleError,
    EngineError,
    EngineOptions,
    Realizable,
    Unknown,
    Unrealizable,
    check_realizability,
    confirm_stuck,
    extract_counterexample,
)
from .evaluate import (
    DivisionByZero,
    MissingBinding,
    ReplayFailure,
    ReplayVerdict,
    Step,
    Trace,
    eval_expr,
    replay_trace,
    trace_from_json,
    trace_to_json,
)
from .oracle import (
    DomainSpec,
    DomainTooLarge,
    NotRealizable,
    RealVariableUnsupported,
    TransitionSystemTable,
    audit_realization,
    enumerate_viable,
    oracle_base_check,
    oracle_base_check_simplified,
    oracle_extend_check,
    oracle_extend_n,
    oracle_realizable,
    oracle_viable_n,
    parse_domain_annotation,
    restrict_to_domain,
    synthesize_realization,
)
from .corpus import GenParams, random_contract
from .parser import ContractError, ParseError, parse_contract, parse_expr
from .smtlib import (
    SolverError,
    SolverVerdict,
    Status,
    check_incremental,
    check_query,
    emit_script,
    parse_model,
    start_session,
)
from .syntax import Contract, Kind, Sort, VarDecl, format_contract, format_expr
from .typecheck import TypeCheckError, TypedContract, load_contract, typecheck
from .unroll import (
    QueryFormula,
    StepVar,
    build_base_negation,
    build_extend_negation,
    build_initial_sat,
    build_path_constraint,
)

__version__ = "0.1.0"
