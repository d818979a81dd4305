"""
Unrolled queries and their SMT-LIB text
=======================================

At depth ``n`` the engine asks two questions.  The base query looks for a
run of ``n`` guarded steps from an initial state that ends in a state with
no answer to some valid input.  The extend query asks the same without the
initial state.  Both have one block of existential variables and a
universally quantified next state.
"""

from viable import load_contract
from viable.smtlib import check_query, emit_script
from viable.unroll import build_base_negation, build_extend_negation

c = load_contract("input i:int; state s:int; init s >= 0; trans s' = s - 1 and s' >= 0;")

q = build_base_negation(c, 1)
print("exists:", [v.rendered for v in q.exists])
print("forall:", [v.rendered for v in q.forall])
print(emit_script(q))

# %%
# Sending the scripts to the solver.  A satisfiable base query is a stuck
# run; an unsatisfiable extend query means every run can go on.
for n in range(3):
    base = check_query(build_base_negation(c, n)).status.value
    ext = check_query(build_extend_negation(c, n)).status.value
    print(f"n={n}: base {base}, extend {ext}")
