"""Real branches of the Lambert W function on the interval that matters here.

W(x) solves w * exp(w) = x. For x in [-1/e, 0) there are two real solutions;
the optimal-window formula needs the lower one (w <= -1) and the identity
checks need the principal one (w >= -1). Both solvers start from a cheap
initial guess, polish with Halley steps, and fall back to bisection if the
iteration ever leaves its branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ParameterError

#: -1/e, the branch point where the two real branches meet
BRANCH_POINT = -math.exp(-1.0)

#: inputs this close to the branch point collapse to w = -1 exactly
BRANCH_ATOL = 1e-14

_MAX_HALLEY = 60
_MAX_BISECT = 200


@dataclass(frozen=True)
class WBranchResult:
    """Solver output: the branch value, |w e^w - x|, and steps taken."""

    value: float
    residual: float
    iterations: int


def _residual(w: float, x: float) -> float:
    return abs(w * math.exp(w) - x)


def _halley(w: float, x: float, lower: bool) -> tuple[float, int, bool]:
    """Polish w with Halley's iteration. Returns (w, steps, ok)."""
    for k in range(_MAX_HALLEY):
        e = math.exp(w)
        f = w * e - x
        # stop once the update would be below float resolution
        denom = e * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0) if w != -1.0 else 0.0
        if denom == 0.0:
            return w, k, _residual(w, x) <= 1e-13 * max(1.0, abs(x))
        step = f / denom
        w_next = w - step
        if lower and w_next > -1.0:
            return w, k, False  # escaped the branch, caller bisects
        if not lower and w_next < -1.0:
            return w, k, False
        if abs(step) <= 1e-16 * (2.0 + abs(w_next)):
            return w_next, k + 1, True
        w = w_next
    return w, _MAX_HALLEY, _residual(w, x) <= 1e-13 * max(1.0, abs(x))


def _bisect(x: float, lo: float, hi: float) -> tuple[float, int]:
    """Bisect w*e^w = x on [lo, hi]; g is monotone on either branch."""
    g = lambda w: w * math.exp(w) - x
    glo = g(lo)
    for k in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            return mid, k
        if (g(mid) > 0.0) == (glo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), _MAX_BISECT


def _check_domain(x: float, upper: float | None) -> None:
    if not math.isfinite(x):
        raise ParameterError(f"argument must be finite, got {x}")
    if x < BRANCH_POINT - BRANCH_ATOL:
        raise ParameterError(f"argument {x} is below the branch point -1/e")
    if upper is not None and x >= upper:
        raise ParameterError(f"lower branch requires argument in [-1/e, 0), got {x}")


def lambert_w_minus1(x: float) -> WBranchResult:
    """Lower real branch W_{-1} on [-1/e, 0); the value is always <= -1.

    Initial guess: the series w = -1 - s - s^2/3 with s = sqrt(2(1 + e x))
    near the branch point, otherwise the asymptotic ln(-x) - ln(-ln(-x))
    toward 0-.
    """
    x = float(x)
    _check_domain(x, upper=0.0)
    if abs(x - BRANCH_POINT) <= BRANCH_ATOL:
        return WBranchResult(-1.0, _residual(-1.0, x), 0)

    s2 = 2.0 * (1.0 + math.e * x)  # vanishes at the branch point
    if s2 < 0.04:
        s = math.sqrt(max(s2, 0.0))
        w0 = -1.0 - s - s * s / 3.0 - (11.0 / 72.0) * s ** 3
    else:
        lx = math.log(-x)
        w0 = lx - math.log(-lx)
    w0 = min(w0, -1.0)

    w, steps, ok = _halley(w0, x, lower=True)
    if not ok or _residual(w, x) > 1e-13 * max(1.0, abs(x)):
        # the bracket walks left until w e^w crosses x
        lo = -2.0
        while lo * math.exp(lo) < x:
            lo *= 2.0
            if lo < -1e4:
                break
        w, extra = _bisect(x, lo, -1.0)
        steps += extra
    w = min(w, -1.0)
    return WBranchResult(w, _residual(w, x), steps)


def lambert_w_principal(x: float) -> WBranchResult:
    """Principal branch W_0 on [-1/e, inf); the value is always >= -1."""
    x = float(x)
    _check_domain(x, upper=None)
    if x == 0.0:
        return WBranchResult(0.0, 0.0, 0)
    if abs(x - BRANCH_POINT) <= BRANCH_ATOL:
        return WBranchResult(-1.0, _residual(-1.0, x), 0)

    s2 = 2.0 * (1.0 + math.e * x)
    if x < 0.0 and s2 < 0.04:
        s = math.sqrt(max(s2, 0.0))
        w0 = -1.0 + s - s * s / 3.0 + (11.0 / 72.0) * s ** 3
    elif x > math.e:
        lx = math.log(x)
        w0 = lx - math.log(lx)
    else:
        w0 = x / (1.0 + x) if x > -0.25 else -0.5
    w0 = max(w0, -1.0)

    w, steps, ok = _halley(w0, x, lower=False)
    if not ok or _residual(w, x) > 1e-13 * max(1.0, abs(x)):
        hi = 1.0
        while hi * math.exp(hi) < x:
            hi *= 2.0
        w, extra = _bisect(x, -1.0, hi)
        steps += extra
    w = max(w, -1.0)
    return WBranchResult(w, _residual(w, x), steps)
