"""
Evaluating formulas and replaying traces
========================================

The evaluator gives each formula the value an SMT solver would: integers
are unbounded, reals are exact fractions, and ``div``/``mod`` round toward
a non-negative remainder.  Replay walks a trace step by step and reports
the first condition that fails.
"""

from viable import ReplayFailure, Step, Trace, eval_expr, load_contract, parse_expr, replay_trace

print(eval_expr(parse_expr("-7 div 2"), {}), eval_expr(parse_expr("-7 mod 2"), {}))
print(eval_expr(parse_expr("0.1 + 0.2 = 0.3"), {}))

# %%
# The decrementing contract: each step lowers ``s`` by one and must stay
# non-negative.
c = load_contract("input i:int; state s:int; init s >= 0; trans s' = s - 1 and s' >= 0;")
good = Trace({"s": 2}, (Step({"i": 0}, {"s": 1}), Step({"i": 0}, {"s": 0})), {"i": 0})
print(replay_trace(c, good))

# %%
# A trace that jumps by two breaks the guarantee at step 1.
bad = Trace({"s": 3}, (Step({"i": 0}, {"s": 1}),))
try:
    replay_trace(c, bad)
except ReplayFailure as exc:
    print(f"step {exc.step} fails {exc.condition}: {exc.values}")
