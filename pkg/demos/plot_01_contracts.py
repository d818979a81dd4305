"""
Writing and checking a contract
===============================

A contract names its state and input variables, then gives three
formulas: the assumption on inputs, the initial guarantee, and the
transitional guarantee.  A primed variable ``x'`` is the next state.
"""

from viable import ParseError, TypeCheckError, format_contract, load_contract

# %%
# A counter that must start at zero and count up forever.
text = """
state x: int;
init  x = 0;
trans x' = x + 1 and x >= 0;
"""
counter = load_contract(text)
print(format_contract(counter))

# %%
# Every node of the checked tree carries its sort, and the declarations
# are split by kind.
print("state:", [d.name for d in counter.state_vars], "inputs:", [d.name for d in counter.input_vars])
print("transition sort:", counter.transition.sort)

# %%
# Errors point at a line and column, or name the rule that was broken.
for bad in ("state x: int; trans x' = ;", "input i: int; state s: int; trans s' = i';"):
    try:
        load_contract(bad)
    except ParseError as exc:
        print("parse error:", exc)
    except TypeCheckError as exc:
        print(f"type error [{exc.rule}]:", exc)
