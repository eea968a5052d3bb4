"""Mining-pool reward schedules under per-share discounting.

Closed-form optimal PPLNS windows and geometric payout rules, a general
budget solver for truncated schedules, and a seeded Monte Carlo simulator
that checks the closed forms from the path level. A FastAPI service and a
thin CLI expose the same operations over the wire.
"""

__version__ = "0.1.0"

from .allocation import (
    AllocationRule,
    Custom,
    Geometric,
    Pplns,
    Solo,
    rule_from_dict,
    truncation_depth,
)
from .analytic import (
    OptimalPplns,
    fixed_rule_steady_state_utility,
    geometric_optimal_rule,
    geometric_steady_state_utility,
    optimal_pplns_n,
    pplns_steady_state_utility,
    proportional_pay_expected_utility,
)
from .core import (
    CustomUtility,
    LogShiftedUtility,
    ParameterError,
    PonziRuleError,
    PoolParams,
    PowerUtility,
    UtilityFunction,
    discounted_sum,
)
from .lambertw import WBranchResult, lambert_w_minus1, lambert_w_principal
from .optimizer import (
    TruncatedSolution,
    extend_truncated,
    solve_fixed_rule_kkt,
    truncated_lagrange_power,
)
from .simulator import (
    ConvergenceReport,
    SimConfig,
    UkEstimates,
    balance_report,
    convergence_report,
    simulate_fixed_rule,
    simulate_proportional,
)

__all__ = [
    "__version__",
    "AllocationRule",
    "ConvergenceReport",
    "Custom",
    "CustomUtility",
    "Geometric",
    "LogShiftedUtility",
    "OptimalPplns",
    "ParameterError",
    "PonziRuleError",
    "PoolParams",
    "PowerUtility",
    "Pplns",
    "SimConfig",
    "Solo",
    "TruncatedSolution",
    "UkEstimates",
    "UtilityFunction",
    "WBranchResult",
    "balance_report",
    "convergence_report",
    "discounted_sum",
    "extend_truncated",
    "fixed_rule_steady_state_utility",
    "geometric_optimal_rule",
    "geometric_steady_state_utility",
    "lambert_w_minus1",
    "lambert_w_principal",
    "optimal_pplns_n",
    "pplns_steady_state_utility",
    "proportional_pay_expected_utility",
    "rule_from_dict",
    "simulate_fixed_rule",
    "simulate_proportional",
    "solve_fixed_rule_kkt",
    "truncated_lagrange_power",
    "truncation_depth",
]
