"""Budget-constrained payout schedules over a truncated offset window.

Given a budget B to spread over offsets 0..n-1, the optimal schedule
maximizes sum u(y_i) delta^i subject to sum y_i = B, y_i >= 0. For power
utility the answer is a geometric profile in closed form; for any utility
with an invertible marginal the same schedule comes out of a one-dimensional
search on the budget multiplier. Both routes are kept and tested against
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import Custom
from .core import ParameterError, UtilityFunction, discounted_sum

_MAX_BRACKET_HALVINGS = 2000
_MAX_BISECT = 400


@dataclass(frozen=True)
class TruncatedSolution:
    """Solution of the truncated schedule problem.

    Attributes:
        y: payout per offset, length n.
        multiplier: shadow price of the budget; u'(y_i) * delta**i equals it
            wherever y_i > 0 and is at most it where y_i = 0.
        objective: sum of u(y_i) * delta**i.
        budget: the budget that was requested.
        budget_used: sum of y, within tolerance of budget and never above it.
    """

    y: np.ndarray
    multiplier: float
    objective: float
    budget: float
    budget_used: float


def _check_common(delta: float, budget: float, n: int) -> None:
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    if not (budget > 0.0) or not math.isfinite(budget):
        raise ParameterError(f"budget must be positive and finite, got {budget}")
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ParameterError(f"window length must be a positive integer, got {n!r}")


def truncated_lagrange_power(alpha: float, delta: float, budget: float, n: int) -> TruncatedSolution:
    """Closed form for u(x) = x**alpha, alpha in (0, 1).

    The schedule is geometric with ratio q = delta**(1/(1-alpha)):
    y_i = budget * (1-q) * q**i / (1-q**n), and the multiplier is
    alpha * (budget (1-q)/(1-q**n))**(alpha-1).
    """
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    _check_common(delta, budget, n)
    q = delta ** (1.0 / (1.0 - alpha))
    qn = q ** n  # underflows to 0 for long windows, which is the right limit
    scale = budget * (1.0 - q) / (1.0 - qn)
    y = scale * np.power(q, np.arange(n, dtype=float))
    objective = discounted_sum(np.power(y, alpha), delta)
    return TruncatedSolution(
        y=y,
        multiplier=alpha * scale ** (alpha - 1.0),
        objective=objective,
        budget=budget,
        budget_used=math.fsum(y.tolist()),
    )


def _schedule_for(u: UtilityFunction, log_delta: float, n: int, lam: float) -> np.ndarray:
    """Candidate payouts for a multiplier: y_i = (u')^{-1}(lam / delta^i),
    clamped to 0 once the required marginal exceeds u'(0+)."""
    with np.errstate(over="ignore"):
        z = lam * np.exp(-log_delta * np.arange(n, dtype=float))
    y = np.zeros(n)
    active = z < u.marginal_at_zero
    if np.any(active):
        y[active] = u.inverse_marginal(z[active])
    return np.maximum(y, 0.0)


def solve_fixed_rule_kkt(
    u: UtilityFunction,
    delta: float,
    budget: float,
    n: int,
    tol: float = 1e-10,
) -> TruncatedSolution:
    """Solve the truncated schedule problem for any invertible-marginal u.

    Bisects the budget multiplier: total payout is continuous and
    nonincreasing in it, so the bracket [high marginal -> pays nothing,
    low marginal -> pays more than budget] pinches onto the schedule whose
    total is within tol * budget of the budget, from the feasible side.
    """
    _check_common(delta, budget, n)
    if not (tol > 0.0):
        raise ParameterError(f"tol must be positive, got {tol}")
    log_delta = math.log(delta)

    if math.isinf(u.marginal_at_zero):
        lam_hi = float(u.marginal(budget * 1e-16))
    else:
        lam_hi = float(u.marginal_at_zero)
    if not (lam_hi > 0.0) or not math.isfinite(lam_hi):
        raise ParameterError("utility marginal is unusable near zero")

    def total(lam: float) -> float:
        return float(np.sum(_schedule_for(u, log_delta, n, lam)))

    while total(lam_hi) > budget:
        lam_hi *= 2.0  # only reachable for marginals that misreport u'(0+)

    lam_lo = lam_hi
    for _ in range(_MAX_BRACKET_HALVINGS):
        if total(lam_lo) >= budget:
            break
        lam_lo *= 0.5
    else:
        raise ParameterError("budget is not reachable for any multiplier")

    lam = lam_hi
    spent = total(lam)
    for _ in range(_MAX_BISECT):
        if spent <= budget and budget - spent <= tol * budget:
            break
        mid = 0.5 * (lam_lo + lam_hi)
        if mid == lam_lo or mid == lam_hi:
            lam = lam_hi  # float resolution exhausted, keep the feasible side
            spent = total(lam)
            break
        s = total(mid)
        if s > budget:
            lam_lo = mid
        else:
            lam_hi = mid
            lam, spent = mid, s
    if not (spent <= budget and budget - spent <= 10.0 * tol * budget):
        raise ParameterError("multiplier search failed to meet tolerance")

    y = _schedule_for(u, log_delta, n, lam)
    objective = discounted_sum(np.asarray(u(y), dtype=float), delta)
    return TruncatedSolution(
        y=y,
        multiplier=lam,
        objective=objective,
        budget=budget,
        budget_used=math.fsum(y.tolist()),
    )


def extend_truncated(sol: TruncatedSolution) -> Custom:
    """Zero-pad a truncated schedule into an allocation rule.

    Weights are y_i / budget, so the rule's mass is budget_used / budget,
    which the solvers keep at or just under 1.
    """
    return Custom(weights=tuple(float(v) / sol.budget for v in sol.y))
