"""
Choosing breakpoints
====================

With carryover of order ``m``, switching too often wastes observations
that mix treatment and control. The minimax variance bound trades this
off against long, correlated runs.
"""

from rbsd import BreakpointProblem, objective, optimize

# %%
# Without carryover the best breakpoints split the horizon evenly.
sol = optimize(BreakpointProblem(n_steps=9, n_breakpoints=2, carryover=0))
print(sol.breakpoints, sol.objective_value)

# %%
# Carryover lengthens the first and last segments.
for m in range(4):
    sol = optimize(BreakpointProblem(28, 4, m))
    print(f"m={m}: {sol.breakpoints}  bound {sol.objective_value}  ({sol.mode})")

# %%
# The dynamic program handles horizons far beyond exhaustive search.
sol = optimize(BreakpointProblem(365, 12, 3), mode="dp")
print(sol.breakpoints, sol.objective_value)
assert objective(sol.breakpoints, 3, 365) == sol.objective_value
