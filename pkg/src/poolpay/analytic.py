"""Closed-form steady-state utilities for the standard pool schemes.

All values are the discounted expected utility per submitted share, with the
share's own block counted at discount delta**0. Every closed form here has a
matching brute-force summation path through fixed_rule_steady_state_utility,
and the tests hold the two routes together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import AllocationRule, Geometric, truncation_depth
from .core import ParameterError, PoolParams, UtilityFunction, discounted_sum
from .lambertw import lambert_w_minus1


def _check_alpha(alpha: float, strict_upper: bool = False) -> float:
    hi_ok = alpha < 1.0 if strict_upper else alpha <= 1.0
    if not (0.0 < alpha and hi_ok) or not math.isfinite(alpha):
        rng = "(0, 1)" if strict_upper else "(0, 1]"
        raise ParameterError(f"alpha must be in {rng}, got {alpha}")
    return float(alpha)


def pplns_steady_state_utility(params: PoolParams, alpha: float, n: float) -> float:
    """Utility of one share in a PPLNS pool with window n.

    Each share collects u(B/n) from every block among itself and its n - 1
    successors, so the value is p * B**alpha * n**-alpha * (1-delta**n)/(1-delta).
    Real-valued n is accepted; the integer case is the pool rule, the real
    case is what the window optimizer extremizes.
    """
    _check_alpha(alpha)
    if not (n >= 1.0) or not math.isfinite(n):
        raise ParameterError(f"window must be at least 1, got {n}")
    p, b, delta = params.p, params.block_reward, params.delta
    return p * b ** alpha * n ** -alpha * (1.0 - delta ** n) / (1.0 - delta)


@dataclass(frozen=True)
class OptimalPplns:
    """Optimal PPLNS window: the real maximizer and its integer rounding."""

    n_real: float
    n_int: int
    utility_at_n_int: float


def optimal_pplns_n(params: PoolParams, alpha: float) -> OptimalPplns:
    """Window maximizing the PPLNS utility.

    For alpha < 1 the real maximizer is (W_{-1}(-alpha e^-alpha) + alpha)/ln(delta)
    on the lower Lambert branch. For alpha = 1 the utility is strictly
    decreasing in the window, so 1 is optimal. The integer window is whichever
    of floor/ceil of the real maximizer scores higher, ties to the smaller,
    never below 1.
    """
    alpha = _check_alpha(alpha)
    if alpha == 1.0:
        return OptimalPplns(1.0, 1, pplns_steady_state_utility(params, alpha, 1))

    w = lambert_w_minus1(-alpha * math.exp(-alpha)).value
    n_real = (w + alpha) / math.log(params.delta)

    candidates = sorted({max(1, math.floor(n_real)), max(1, math.ceil(n_real))})
    best_n, best_val = candidates[0], pplns_steady_state_utility(params, alpha, candidates[0])
    for n in candidates[1:]:
        val = pplns_steady_state_utility(params, alpha, n)
        if val > best_val:
            best_n, best_val = n, val
    return OptimalPplns(n_real, int(best_n), best_val)


def geometric_optimal_rule(alpha: float, delta: float) -> Geometric:
    """The geometric profile that is utility-optimal among all fixed rules.

    c = 1 - delta**(1/(1-alpha)) and r = delta**(1/(1-alpha)); the two are
    tied so the rule pays out exactly one block reward in total. Requires
    alpha < 1; the risk-neutral limit degenerates to solo mining and callers
    wanting it should build Solo explicitly.
    """
    alpha = _check_alpha(alpha, strict_upper=True)
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    r = delta ** (1.0 / (1.0 - alpha))
    return Geometric(c=1.0 - r, r=r)


def geometric_steady_state_utility(params: PoolParams, alpha: float) -> float:
    """Utility per share under the optimal geometric rule.

    Summing p * u(B c r^i) delta^i over all offsets with c = 1 - r collapses
    to p * B**alpha * (1 - delta**(1/(1-alpha)))**(alpha-1).
    """
    alpha = _check_alpha(alpha, strict_upper=True)
    p, b, delta = params.p, params.block_reward, params.delta
    return p * b ** alpha * (1.0 - delta ** (1.0 / (1.0 - alpha))) ** (alpha - 1.0)


def fixed_rule_steady_state_utility(
    params: PoolParams,
    u: UtilityFunction,
    rule: AllocationRule,
    eps: float = 1e-12,
) -> float:
    """Brute-force route: sum p * u(B w_i) delta^i to truncation depth eps.

    Agrees with the closed forms above to within eps plus float noise; the
    redundancy is deliberate and checked, not an implementation detail to
    collapse.
    """
    d = truncation_depth(rule, params, u, eps)
    w = rule.weights_array(d)
    per_offset = params.p * np.asarray(u(params.block_reward * w), dtype=float)
    return discounted_sum(per_offset, params.delta)


def proportional_pay_expected_utility(
    params: PoolParams,
    u: UtilityFunction,
    eps: float = 1e-12,
) -> float:
    """Expected utility per share when each block is split over its round.

    A round is the stretch of shares since the previous block. For a share in
    steady state, the count of earlier shares in its round and the count of
    shares until the round closes are independent geometrics, so the value is

        sum_{a,f >= 0} p^2 (1-p)^(a+f) u(B/(a+f+1)) delta^f

    evaluated by collapsing on s = a + f. The tail past S is bounded by
    p u(B) (1-p)^(S+1) / (1-delta) and S is chosen to push that below eps.
    """
    if not (eps > 0.0) or not math.isfinite(eps):
        raise ParameterError(f"eps must be positive and finite, got {eps}")
    p, b, delta = params.p, params.block_reward, params.delta
    u_b = float(u(b))
    if p == 1.0:
        return u_b  # every share is a block and keeps the whole reward

    bound_scale = p * u_b / (1.0 - delta)
    if bound_scale < eps:
        s_max = 0
    else:
        s_max = max(0, math.ceil(math.log(eps / bound_scale) / math.log1p(-p)))

    s = np.arange(s_max + 1, dtype=float)
    survival = np.exp(s * math.log1p(-p))  # (1-p)**s without pow drift
    geo = (1.0 - np.exp((s + 1.0) * math.log(delta))) / (1.0 - delta)
    per_round_u = np.asarray(u(b / (s + 1.0)), dtype=float)
    terms = p * p * survival * per_round_u * geo
    return math.fsum(terms.tolist())
