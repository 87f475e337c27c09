"""
A/A study of standard errors
============================

With no treatment effect at all, the spread of the estimated standard
errors shows how much each design lets unit-level noise through.
"""

from rbsd import DesignSpec, aa_study, gen_lognormal_items

N, S = 2_000, 14
base = gen_lognormal_items(N, S, seed=5)
specs = [DesignSpec(kind, N, S) for kind in ("item", "regular", "rbsd")]
boxes = aa_study(base, specs, reps=50, lag=1, master_seed=5)

# %%
# Balancing each unit's exposure cancels the unit's own level, so the
# balanced design has the tightest estimates.
print(f"{'design':>8} {'median sigma':>13} {'median sigma_1':>15}")
for label, box in boxes.items():
    print(f"{label:>8} {box['sigma']['median']:>13.4f} {box['sigma_lag']['median']:>15.4f}")
