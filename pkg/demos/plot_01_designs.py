"""
Sampling assignment matrices
============================

Five designs share one ``DesignSpec`` type. Each sample is an ``N x S``
matrix of zeros and ones: rows are units, columns are timesteps.
"""

import numpy as np

from rbsd import DesignSpec, check_balanced, check_regular, sample

# %%
# Item randomization treats whole rows, switchback whole columns.
for kind in ("item", "switchback", "iid"):
    W = sample(DesignSpec(kind, n_units=4, n_steps=6), seed=1)
    print(kind)
    print(W.values)

# %%
# A regular design flips a coin per unit at each breakpoint and holds the
# result until the next one.
regular = DesignSpec("regular", 4, 6, breakpoints=(1, 3, 5), weights=(0.5, 0.5, 0.5))
W = sample(regular, seed=2)
print(W.values)
print("regular:", check_regular(W, regular.breakpoints))

# %%
# The balanced design stacks random permutations of a half-ones row with
# their complements: every unit is treated half the time and every
# timestep treats half the units.
W = sample(DesignSpec("rbsd", 6, 8), seed=3)
print(W.values)
print("row sums", W.values.sum(axis=1), "column sums", W.values.sum(axis=0))
print("balanced:", check_balanced(W, 0.5))

# %%
# The same seed always returns the same matrix.
assert np.array_equal(sample(DesignSpec("rbsd", 6, 8), 3).values, W.values)
