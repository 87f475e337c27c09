"""Regular balanced switchback designs for item-by-time experiments.

Submodules
----------
design       -- design specs, samplers, balance/regularity checks
exposure     -- exact marginal and window assignment probabilities
estimation   -- Horvitz-Thompson estimators, standard errors, z-tests
breakpoints  -- minimax breakpoint placement
synthetic    -- skewed synthetic outcome panels
simulation   -- carryover model and Monte-Carlo evaluation
io           -- CSV/JSON formats
cli          -- ``rbsd`` command line tool
"""

from .breakpoints import BreakpointProblem, BreakpointSolution, objective, optimize
from .design import (
    AssignmentMatrix,
    DesignKind,
    DesignSpec,
    InvalidDesignError,
    check_balanced,
    check_regular,
    sample,
    sample_bsd_rejection_oracle,
)
from .estimation import (
    EstimateReport,
    UnitEffects,
    exposure_mapping_estimate,
    ht_tau,
    ht_tau_lag,
    one_sample_ztest,
    std_error,
    two_sample_ztest,
    unit_effects,
)
from .exposure import (
    WindowProbability,
    marginal_prob,
    marginal_probs,
    run_probability,
    window_prob_arrays,
    window_probs,
)
from .simulation import (
    CarryoverModel,
    SimulationReport,
    aa_study,
    apply_carryover,
    monte_carlo,
    true_estimands,
)
from .synthetic import OutcomeMatrix, gen_lognormal_items, gen_powerlaw_users

__version__ = "0.1.0"
