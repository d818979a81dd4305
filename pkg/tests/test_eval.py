import json
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from viable import (
    DivisionByZero,
    MissingBinding,
    ReplayFailure,
    ReplayVerdict,
    Step,
    Trace,
    eval_expr,
    load_contract,
    parse_expr,
    replay_trace,
    trace_from_json,
    trace_to_json,
)
from viable import smtlib
from viable.evaluate import smt_div, smt_mod
from viable.syntax import Binary, Ite, Kind, Lit, Sort, Unary, Var, transform
from viable.unroll import StepVar


def test_example_one_guarantee_at_zero():
    assert eval_expr(parse_expr("s <> 0"), {"s": 0}) is False
    assert eval_expr(parse_expr("s <> 0"), {"s": 5}) is True


def test_example_two_guarantee():
    e = parse_expr("s' = s - 1 and s' >= 0")
    assert eval_expr(e, {"s": 3, "s'": 2}) is True
    assert eval_expr(e, {"s": 0, "s'": -1}) is False


@pytest.mark.parametrize("v", [-10**30, -7, 0, 1, 12345678901234567890])
def test_additive_identity(v):
    assert eval_expr(parse_expr("x + 0"), {"x": v}) == v


@pytest.mark.parametrize("a,b,q,r", [
    (7, 2, 3, 1), (-7, 2, -4, 1), (7, -2, -3, 1), (-7, -2, 4, 1), (6, 3, 2, 0), (-1, 5, -1, 4),
])
def test_euclidean_division(a, b, q, r):
    assert smt_div(a, b) == q
    assert smt_mod(a, b) == r
    assert a == b * q + r and 0 <= r < abs(b)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        eval_expr(parse_expr("x div y"), {"x": 1, "y": 0})
    with pytest.raises(DivisionByZero):
        eval_expr(parse_expr("x mod 0"), {"x": 1})


def test_missing_binding():
    with pytest.raises(MissingBinding):
        eval_expr(parse_expr("x' > 0"), {"x": 1})


def test_reals_stay_exact():
    v = eval_expr(parse_expr("0.1 + 0.2"), {})
    assert v == Fraction(3, 10)
    assert eval_expr(parse_expr("0.1 + 0.2 = 0.3"), {}) is True
    assert eval_expr(parse_expr("real(x) * 0.5"), {"x": 3}) == Fraction(3, 2)


def test_short_circuit_skips_division():
    # "and" stops before the division; the solver's total semantics agrees
    assert eval_expr(parse_expr("y <> 0 and x div y > 0"), {"x": 1, "y": 0}) is False


def test_ite():
    e = parse_expr("if b then 1 else 2")
    assert eval_expr(e, {"b": True}) == 1
    assert eval_expr(e, {"b": False}) == 2


# -- replay --------------------------------------------------------------------


def test_replay_example_one(ex1):
    t = Trace({"s": 0}, (), {"i": 0})
    assert replay_trace(ex1, t) is ReplayVerdict.NEEDS_SUCCESSOR_CHECK


def test_replay_example_two(ex2):
    t = Trace({"s": 0}, (), {"i": 0})
    assert replay_trace(ex2, t) is ReplayVerdict.NEEDS_SUCCESSOR_CHECK


def test_replay_rejects_bad_initial_state(ex2):
    with pytest.raises(ReplayFailure) as info:
        replay_trace(ex2, Trace({"s": -1}))
    assert (info.value.step, info.value.condition) == (0, "init")
    assert info.value.values == {"s": -1}


def test_replay_reports_first_failure_only(ex2):
    # step 1 violates the guarantee, step 2 would too
    t = Trace({"s": 3}, (Step({"i": 0}, {"s": 1}), Step({"i": 0}, {"s": 7})), {"i": 0})
    with pytest.raises(ReplayFailure) as info:
        replay_trace(ex2, t)
    assert (info.value.step, info.value.condition) == (1, "trans")


def test_replay_checks_assumption_of_stuck_input():
    c = load_contract("input i:int; state s:int; assume i > 0; trans s' = s;")
    with pytest.raises(ReplayFailure) as info:
        replay_trace(c, Trace({"s": 0}, (), {"i": 0}))
    assert (info.value.step, info.value.condition) == (1, "assume")


def test_replay_without_stuck_input_is_ok(counter):
    t = Trace({"x": 0}, (Step({}, {"x": 1}), Step({}, {"x": 2})))
    assert replay_trace(counter, t) is ReplayVerdict.OK


def test_replay_missing_values(counter):
    with pytest.raises(MissingBinding):
        replay_trace(counter, Trace({}))


# -- JSON ------------------------------------------------------------------------


def test_trace_json_schema():
    c = load_contract("input f:bool; input k:int; state g:real; trans true;")
    t = Trace({"g": Fraction(-3, 2)}, (Step({"f": True, "k": 10**25}, {"g": Fraction(0)}),), {"f": False, "k": -1})
    data = trace_to_json(t)
    assert data == {
        "initial": {"g": "-3/2"},
        "steps": [{"input": {"f": True, "k": "10000000000000000000000000"}, "next": {"g": "0/1"}}],
        "stuck_input": {"f": False, "k": "-1"},
    }
    assert trace_from_json(json.dumps(data), c) == t


def test_trace_json_without_stuck_input(counter):
    t = Trace({"x": 0}, (Step({}, {"x": 1}),))
    data = trace_to_json(t)
    assert data["stuck_input"] is None
    assert trace_from_json(data, counter) == t


# -- evaluator against solver ----------------------------------------------------

_VARS = {"x": Sort.INT, "y": Sort.INT, "x'": Sort.INT, "b": Sort.BOOL, "r": Sort.REAL}


def _int_terms():
    leaves = st.one_of(st.integers(-6, 6).map(Lit), st.sampled_from([Var("x"), Var("y"), Var("x", True)]))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(Binary, st.sampled_from(["+", "-", "*", "div", "mod"]), sub, sub),
            st.builds(Unary, st.just("-"), sub),
        ),
        max_leaves=5,
    )


def _real_terms():
    leaves = st.one_of(
        st.builds(lambda n, d: Lit(Fraction(n, d)), st.integers(-9, 9), st.sampled_from([1, 2, 4, 10])),
        st.just(Var("r")),
        _int_terms().map(lambda t: Unary("real", t)),
    )
    return st.recursive(
        leaves, lambda sub: st.builds(Binary, st.sampled_from(["+", "-", "*"]), sub, sub), max_leaves=4
    )


def _formulas():
    cmp = st.sampled_from(["=", "<>", "<", "<=", ">", ">="])
    atoms = st.one_of(
        st.builds(Binary, cmp, _int_terms(), _int_terms()),
        st.builds(Binary, cmp, _real_terms(), _real_terms()),
        st.just(Var("b")),
        st.booleans().map(Lit),
    )
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.builds(Binary, st.sampled_from(["and", "or", "=>", "="]), sub, sub),
            st.builds(Unary, st.just("not"), sub),
            st.builds(Ite, sub, sub, sub),
        ),
        max_leaves=5,
    )


_envs = st.fixed_dictionaries({
    "x": st.integers(-20, 20),
    "y": st.integers(-20, 20),
    "x'": st.integers(-20, 20),
    "b": st.booleans(),
    "r": st.builds(Fraction, st.integers(-20, 20), st.sampled_from([1, 3, 8])),
})


def _plain(name):
    return name.replace("'", "_next") + "$0"


@pytest.fixture(scope="module")
def session():
    with smtlib.start_session(timeout=10) as s:
        for name, sort in _VARS.items():
            s.declare(StepVar(name.replace("'", "_next"), sort, Kind.STATE, 0))
        yield s


@pytest.mark.solver
@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(e=_formulas(), env=_envs)
def test_eval_agrees_with_solver(session, e, env):
    try:
        expected = eval_expr(e, env)
    except DivisionByZero:
        assume(False)
    renamed = transform(e, lambda n: replace(n, name=_plain(n.name + "'" * n.primed), primed=False)
                        if isinstance(n, Var) else n)
    pins = [f"(= {_plain(k)} {smtlib.render_value(v)})" for k, v in env.items()]
    delta = smtlib.Fragment((), (smtlib.render_conjunction(pins + [smtlib.render_expr(renamed)]),))
    verdict = smtlib.check_incremental(session, smtlib.Fragment(), delta, {}, timeout=10)
    assert verdict.decided
    assert (verdict.status is smtlib.Status.SAT) == expected
