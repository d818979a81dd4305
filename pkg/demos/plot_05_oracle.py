"""
The finite-domain oracle
========================

On a finite range of values the game between environment and system can
be solved exactly.  The viable region is a greatest fixpoint over boolean
arrays indexed by state, computed with numpy.
"""

from viable import load_contract
from viable.oracle import DomainSpec, finite_game

c = load_contract("input i:int; state s:int; trans s <> 0;")
game = finite_game(c, DomainSpec({"s": (-2, 2), "i": (0, 0)}))

print("states:", [game.state_dict(s)["s"] for s in game.states])
print("viable:", game.viable().astype(int))
print("realizable:", game.realizable())

# %%
# A realizing transition system can be read off the viable region, and the
# audit checks it against the contract.
table = game.synthesize()
print("initial states:", sorted(table.initial), "transitions:", len(table.transitions))
print("audit problems:", game.audit(table))

# %%
# The bounded checks for the count-down contract.  Every bounded base
# check holds on ``0..5``, while the one-alternation check used by the
# engine already fails at depth 0.
down = finite_game(
    load_contract("input i:int; state s:int; init s >= 0; trans s' = s - 1 and s' >= 0;"),
    DomainSpec({"s": (0, 5), "i": (0, 0)}),
)
print([down.base_check(n) for n in range(5)], down.base_check_simplified(0))
