"""
Deciding realizability
======================

``check_realizability`` deepens ``n`` until one of the two queries settles
the question.  Unrealizable answers come with a trace that ends in a stuck
step; the trace is replayed and its last state is checked for successors
before it is returned.
"""

from viable import EngineOptions, check_realizability, load_contract
from viable.cli import format_trace

contracts = {
    "counter": "state x:int; init x = 0; trans x' = x + 1 and x >= 0;",
    "avoid zero": "input i:int; state s:int; trans s <> 0;",
    "count down": "input i:int; state s:int; init s >= 0; trans s' = s - 1 and s' >= 0;",
}

for name, text in contracts.items():
    c = load_contract(text)
    result = check_realizability(c, EngineOptions(max_depth=10))
    print(f"{name}: {result}")
    if getattr(result, "trace", None) is not None:
        print(format_trace(c, result.trace))

# %%
# "avoid zero" is realizable: a system that starts away from zero and never
# moves there satisfies it.  The engine still reports a stuck trace from
# ``s = 0``, because it does not let the system pick its initial state or
# earlier moves to avoid one.  Such traces are flagged ``spurious_possible``.
