"""
Exposure probabilities
======================

The lagged estimator divides by the chance that a unit's last ``lag + 1``
assignments are all treated (or all control). That chance depends on the
design.
"""

from fractions import Fraction

from rbsd import DesignSpec, run_probability, window_probs

# %%
# In a fixed-weight row of length S with S/2 ones, two given timesteps are
# both treated with probability (S - 2) / (4 (S - 1)).
for S in (4, 6, 14, 100, 10_000):
    exact = run_probability(S, Fraction(1, 2), 1, exact=True)
    print(f"S={S:>6}: {exact} = {float(exact):.5f}")

# %%
# Independent fair coins give exactly 1/4 instead, and item randomization
# gives 1/2 because rows never change.
for kind in ("regular", "iid", "item", "switchback", "rbsd"):
    wp = window_probs(DesignSpec(kind, 2, 14), lag=1)
    print(f"{kind:>10}: treated {wp.p_all_treated:.4f}  control {wp.p_all_control:.4f}")

# %%
# With uneven breakpoints the answer depends on where the window ends.
spec = DesignSpec("regular", 2, 6, breakpoints=(1, 4), weights=(0.3, 0.7))
for step in range(2, 7):
    wp = window_probs(spec, 1, step=step)
    print(step, round(wp.p_all_treated, 3), round(wp.p_all_control, 3))
