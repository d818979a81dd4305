"""
Differential testing on generated contracts
===========================================

Random small contracts come with a finite domain.  For each one the
oracle's fixpoint properties are checked exhaustively, and the engine,
run on the domain-restricted contract, is compared with the oracle.
"""

from collections import Counter

from viable import EngineOptions
from viable.corpus import corpus
from viable.differential import engine_vs_oracle, theorem_violations
from viable.oracle import finite_game
from viable.syntax import format_expr

seed, c, dom = next(iter(corpus([7])))
print(dom.annotation())
print("assume:", format_expr(c.assumption))
print("init:  ", format_expr(c.initial))
print("trans: ", format_expr(c.transition))

# %%
opts = EngineOptions(max_depth=5, per_check_timeout=5)
tally, problems = Counter(), []
for seed, c, dom in corpus(range(40)):
    problems += theorem_violations(finite_game(c, dom))
    rec = engine_vs_oracle(c, dom, opts, seed)
    tally[(rec.engine, "oracle realizable" if rec.oracle else "oracle unrealizable")] += 1
    problems += rec.violations

for key, count in sorted(tally.items()):
    print(key, count)
print("violations:", problems)
