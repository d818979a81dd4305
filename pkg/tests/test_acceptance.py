"""Acceptance suite: one test per criterion, reported as PASS/FAIL lines at
the end of the pytest run (see ``pytest_terminal_summary`` in conftest)."""

import time
from collections import Counter

import pytest

from viable import (
    EngineOptions,
    Realizable,
    ReplayVerdict,
    Unknown,
    Unrealizable,
    check_realizability,
    confirm_stuck,
    replay_trace,
)
from viable.cli import main
from viable.corpus import corpus
from viable.differential import engine_vs_oracle, incremental_vs_monolithic, theorem_violations
from viable.oracle import DomainSpec, finite_game, parse_domain_annotation
from viable.smtlib import Status

from conftest import FIXTURES, GOLDEN, fixture_text, load_fixture

pytestmark = pytest.mark.solver

CORPUS_SEEDS = range(300)
TIME_LIMIT = 5.0


def timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def test_criterion_1_example_one_spurious_counterexample():
    c = load_fixture("ex1")
    result, elapsed = timed(check_realizability, c)
    assert isinstance(result, Unrealizable) and result.depth == 0
    assert result.trace.initial == {"s": 0}
    assert replay_trace(c, result.trace) is ReplayVerdict.NEEDS_SUCCESSOR_CHECK
    assert confirm_stuck(c, result.trace) is True
    dom = parse_domain_annotation(fixture_text("ex1"))
    assert dom.ranges["s"] == (-2, 2)
    assert finite_game(c, dom).realizable() is True
    assert elapsed < TIME_LIMIT


def test_criterion_2_example_two_genuinely_unrealizable():
    start = time.perf_counter()
    c = load_fixture("ex2")
    result = check_realizability(c)
    assert isinstance(result, Unrealizable) and result.depth == 0
    dom = parse_domain_annotation(fixture_text("ex2"))
    assert dom.ranges["s"] == (-1, 3)
    game = finite_game(c, dom)
    assert game.realizable() is False
    assert not game.viable().any()
    wide = finite_game(c, DomainSpec({"s": (0, 5), "i": (0, 0)}))
    assert all(wide.base_check(n) for n in range(5))
    assert wide.base_check_simplified(0) is False
    assert time.perf_counter() - start < TIME_LIMIT


@pytest.mark.parametrize("name,kind,depth", [
    ("osas", Unrealizable, 0),
    ("counter", Realizable, 1),
    ("trivial", Realizable, 0),
])
def test_criterion_3_case_study_classification(name, kind, depth):
    result, elapsed = timed(check_realizability, load_fixture(name))
    assert isinstance(result, kind)
    assert result.depth == depth
    assert elapsed < TIME_LIMIT


def test_criterion_4_theorem_properties():
    start = time.perf_counter()
    problems = []
    for seed, c, dom in corpus(CORPUS_SEEDS):
        problems += [f"seed {seed}: {v}" for v in theorem_violations(finite_game(c, dom))]
    elapsed = time.perf_counter() - start
    print(f"criterion 4: {len(CORPUS_SEEDS)} contracts in {elapsed:.1f}s")
    assert problems == []
    assert elapsed < 600


def test_criterion_5_engine_oracle_soundness():
    opts = EngineOptions(max_depth=5, per_check_timeout=5.0)
    verdicts = Counter()
    problems = []
    for seed, c, dom in corpus(CORPUS_SEEDS):
        rec = engine_vs_oracle(c, dom, opts, seed)
        verdicts[(rec.engine, rec.oracle)] += 1
        problems += [f"seed {seed}: {v}" for v in rec.violations]
    print("criterion 5: (engine, oracle realizable) counts:", dict(sorted(verdicts.items())))
    assert problems == []
    assert verdicts[("realizable", False)] == 0


def test_criterion_6_incremental_equals_monolithic():
    mismatches = []
    for seed, c, _ in corpus(range(50)):
        for kind, (inc, mono) in incremental_vs_monolithic(c, depths=3, timeout=5.0).items():
            if inc != mono:
                mismatches.append(f"seed {seed} {kind}: {inc} vs {mono}")
            if Status.UNKNOWN in inc:
                mismatches.append(f"seed {seed} {kind}: undecided query")
    assert mismatches == []


def test_criterion_7_golden_scripts(tmp_path, capsys):
    for name in ("ex1", "ex2", "counter", "osas"):
        for n in (0, 1, 2):
            assert main(["dump-smt", str(FIXTURES / f"{name}.ctr"), "-n", str(n), "-o", str(tmp_path)]) == 0
            for kind in ("base", "extend"):
                produced = tmp_path / f"{name}_{kind}_{n}.smt2"
                assert produced.read_bytes() == (GOLDEN / produced.name).read_bytes(), produced.name
    capsys.readouterr()
