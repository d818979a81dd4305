from collections import Counter

import numpy as np
import pytest

from viable import (
    DomainSpec,
    DomainTooLarge,
    NotRealizable,
    RealVariableUnsupported,
    TransitionSystemTable,
    audit_realization,
    enumerate_viable,
    load_contract,
    oracle_base_check,
    oracle_base_check_simplified,
    oracle_extend_check,
    oracle_extend_n,
    oracle_realizable,
    oracle_viable_n,
    parse_domain_annotation,
    random_contract,
    synthesize_realization,
)
from viable.corpus import GenParams, corpus
from viable.differential import _brute_force_realization, theorem_violations
from viable.oracle import OracleError, finite_game
from viable.typecheck import TypedContract

from conftest import fixture_text, load_fixture

D1 = DomainSpec({"s": (-2, 2), "i": (0, 0)})
D2 = DomainSpec({"s": (-1, 3), "i": (0, 0)})
D2_WIDE = DomainSpec({"s": (0, 5), "i": (0, 0)})
FREE = "input i:int; state s:int; init s = 0; trans true;"


def test_viable_example_one(ex1):
    assert enumerate_viable(ex1, D1) == {(-2,), (-1,), (1,), (2,)}


def test_viable_example_two_is_empty(ex2):
    assert enumerate_viable(ex2, D2) == frozenset()


def test_unconstrained_transition_is_all_viable():
    c = load_contract(FREE)
    assert enumerate_viable(c, D1) == {(s,) for s in range(-2, 3)}


def test_realizable_examples(ex1, ex2):
    assert oracle_realizable(ex1, D1) is True
    assert oracle_realizable(ex2, D2) is False
    assert oracle_realizable(load_contract("input i:int; state s:int; init false;"), D1) is False


def test_viable_n_examples(ex1, ex2):
    assert all(oracle_viable_n(ex1, D1, (s,), 0) for s in range(-2, 3))
    assert oracle_viable_n(ex2, D2_WIDE, (0,), 1) is False
    for n in range(5):
        assert oracle_viable_n(ex2, D2_WIDE, {"s": n}, n) is True
        assert oracle_viable_n(ex2, D2_WIDE, {"s": n}, n + 1) is False


def test_extend_n_examples(ex2, counter):
    # from 0 any step is already stuck
    assert oracle_extend_n(ex2, D2_WIDE, (0,), 0) is False
    # from 3, every 1-step path lands on 2, which can still move
    assert oracle_extend_n(ex2, D2_WIDE, (3,), 1) is True
    assert oracle_extend_n(ex2, D2_WIDE, (3,), 3) is False


def test_base_checks_example_two(ex2):
    assert [oracle_base_check(ex2, D2_WIDE, n) for n in range(5)] == [True] * 5
    assert oracle_base_check_simplified(ex2, D2_WIDE, 0) is False
    assert [oracle_extend_check(ex2, D2_WIDE, n) for n in range(5)] == [False] * 5


def test_simplified_base_check_example_one_always_fails(ex1):
    assert [oracle_base_check_simplified(ex1, D1, n) for n in range(7)] == [False] * 7
    assert [oracle_base_check(ex1, D1, n) for n in range(7)] == [True] * 7


def test_unconstrained_checks_all_hold():
    c = load_contract(FREE)
    for n in range(5):
        assert oracle_base_check(c, D1, n) and oracle_extend_check(c, D1, n)
        assert oracle_base_check_simplified(c, D1, n)


def test_depth_cap(ex1):
    with pytest.raises(OracleError):
        oracle_base_check(ex1, D1, 7)
    deep = DomainSpec({"s": (-2, 2), "i": (0, 0)}, depth_cap=10)
    assert oracle_base_check(ex1, deep, 10) is True


def test_synthesize_example_one(ex1):
    table = synthesize_realization(ex1, D1)
    assert table.initial == {(-2,)}
    assert all(t != (0,) for (_s, _i, t) in table.transitions)
    # G_T forbids every move out of 0, and T also drops every move into 0
    assert len(table.transitions) == 4 * 4
    assert audit_realization(ex1, D1, table) == []


def test_synthesize_unconstrained():
    c = load_contract(FREE)
    table = synthesize_realization(c, D1)
    assert table.initial == {(0,)}
    assert len(table.transitions) == 5 * 1 * 5


def test_synthesize_unrealizable(ex2):
    with pytest.raises(NotRealizable):
        synthesize_realization(ex2, D2)


def test_audit_catches_each_condition(ex1):
    good = synthesize_realization(ex1, D1)
    # moving into 0 is allowed by G_T, but 0 is then reachable and stuck
    into_zero = TransitionSystemTable(good.initial, good.transitions | {((-2,), (0,), (0,))})
    assert [p[:2] for p in audit_realization(ex1, D1, into_zero)] == ["4:"]
    # starting at 0 and moving anywhere violates G_T
    from_zero = TransitionSystemTable(frozenset({(0,)}), frozenset({((0,), (0,), (1,))}) | good.transitions)
    assert [p[:2] for p in audit_realization(ex1, D1, from_zero)] == ["2:"]
    assert audit_realization(ex1, D1, TransitionSystemTable(frozenset(), good.transitions)) == ["3: no initial state"]
    stuck = TransitionSystemTable(good.initial, frozenset())
    assert audit_realization(ex1, D1, stuck)[0].startswith("4:")
    c = load_contract("input i:int; state s:int; init s = 1; trans s <> 0;")
    assert audit_realization(c, D1, good)[0].startswith("1:")


def test_unreachable_bad_transitions_are_allowed(ex1):
    # a transition into 0 from a state the system never reaches is harmless
    table = TransitionSystemTable(frozenset({(1,)}), frozenset({((1,), (0,), (1,)), ((2,), (0,), (0,))}))
    assert audit_realization(ex1, D1, table) == []


def test_domain_errors():
    osas = load_fixture("osas")
    with pytest.raises(RealVariableUnsupported):
        enumerate_viable(osas, DomainSpec({}))
    with pytest.raises(DomainTooLarge):
        finite_game(load_contract("input i:int; state s:int;"), DomainSpec({"s": (0, 999), "i": (0, 9999)}))
    with pytest.raises(OracleError):
        enumerate_viable(load_contract("state s:int;"), DomainSpec({}))
    with pytest.raises(ValueError):
        DomainSpec({"s": (2, 1)})


def test_cap_is_configurable():
    c = load_contract("input i:int; state s:int;")
    with pytest.raises(DomainTooLarge):
        finite_game(c, DomainSpec({"s": (0, 9), "i": (0, 9)}, cap=99))
    assert len(enumerate_viable(c, DomainSpec({"s": (0, 9), "i": (0, 9)}, cap=100))) == 10


def test_domain_annotation():
    dom = parse_domain_annotation(fixture_text("ex1"))
    assert dom == D1
    assert dom.annotation() == "-- @oracle-domain i: 0..0, s: -2..2"
    assert parse_domain_annotation(dom.annotation()) == dom
    assert parse_domain_annotation("state s:int;") is None
    with pytest.raises(OracleError):
        parse_domain_annotation("-- @oracle-domain s: 1 to 3")


def test_bool_only_contract():
    c = load_contract("input a:bool; state b:bool; trans b' = (not b or a);")
    assert enumerate_viable(c, DomainSpec({})) == {(False,), (True,)}


# -- generator -------------------------------------------------------------------------


def test_generator_is_deterministic():
    assert random_contract(1) == random_contract(1)
    assert random_contract(1)[0] != random_contract(2)[0]


def test_generator_corpus_typechecks_and_is_balanced():
    tally = Counter()
    for seed, c, dom in corpus(range(500)):
        assert isinstance(c, TypedContract)
        g = finite_game(c, dom)
        assert len(g.states) * len(g.inputs) <= dom.cap
        tally[g.realizable()] += 1
    assert tally[True] >= 50 and tally[False] >= 50, tally


def test_generator_params():
    params = GenParams(num_state=1, num_input=0, int_range=(0, 1))
    c, dom = random_contract(3, params)
    assert len(c.state_vars) == 1 and c.input_vars == ()
    assert all(r == (0, 1) for r in dom.ranges.values())


# -- fixpoint and theorem properties ----------------------------------------------------


def _small_games(count):
    for seed, c, dom in corpus(range(count)):
        g = finite_game(c, dom)
        if len(g.states) <= 10:
            yield seed, g


def test_viable_is_the_greatest_fixpoint():
    checked = 0
    for seed, g in _small_games(120):
        v = g.viable()
        assert np.array_equal(g.controllable(v), v), seed
        S = len(g.states)
        for bits in range(1 << S):
            w = np.array([(bits >> k) & 1 for k in range(S)], dtype=bool)
            if np.all(g.controllable(w)[w]):  # w is a post-fixpoint
                assert not np.any(w & ~v), seed
        checked += 1
    assert checked >= 30


def test_realizability_matches_subset_search():
    for seed, g in _small_games(120):
        assert (_brute_force_realization(g) is not None) == g.realizable(), seed


def test_theorem_properties_on_corpus():
    bad = {seed: v for seed, c, dom in corpus(range(100)) if (v := theorem_violations(finite_game(c, dom)))}
    assert bad == {}


def test_converse_of_soundness_fails_on_example_two(ex2):
    assert oracle_base_check(ex2, D2_WIDE, 0) is True
    assert oracle_base_check_simplified(ex2, D2_WIDE, 0) is False
