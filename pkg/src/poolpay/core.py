"""Core model types for pool reward analysis.

A miner submits a stream of shares; each share independently turns out to be
a block with probability p, worth a reward of B. Payouts received i shares
after the share that earned them are discounted by delta**i, so every value
in this package is a discounted sum over share offsets, never wall-clock
time. delta is per accepted share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class ParameterError(ValueError):
    """A parameter is outside its documented domain."""


class PonziRuleError(ValueError):
    """An allocation rule promises more than one block reward per block."""


@dataclass(frozen=True)
class PoolParams:
    """Static pool environment.

    Attributes:
        p: per-share block probability, in (0, 1). p = 1 is allowed only by
            the simulator for deterministic smoke runs, so the open interval
            is widened to (0, 1].
        block_reward: reward B per found block, positive.
        delta: per-share discount factor, in (0, 1). delta = 1 is rejected:
            undiscounted sums over an infinite share stream diverge.
    """

    p: float
    block_reward: float
    delta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.p <= 1.0):
            raise ParameterError(f"p must be in (0, 1], got {self.p}")
        if not (self.block_reward > 0.0) or not math.isfinite(self.block_reward):
            raise ParameterError(
                f"block_reward must be positive and finite, got {self.block_reward}"
            )
        if not (0.0 < self.delta < 1.0):
            raise ParameterError(f"delta must be in (0, 1), got {self.delta}")


class UtilityFunction:
    """Concave nondecreasing utility with u(0) = 0.

    Subclasses provide the function itself plus the marginal u' and its
    inverse, which the budget solver needs. Calls accept scalars or numpy
    arrays of nonnegative values.
    """

    #: value of u'(0+); math.inf when the marginal blows up at zero
    marginal_at_zero: float = math.inf

    def __call__(self, x):
        x = self._check_domain(x)
        return self._eval(x)

    def marginal(self, x):
        x = self._check_domain(x)
        return self._marginal(x)

    def inverse_marginal(self, z):
        """Return y >= 0 with u'(y) = z, clamped to 0 when z >= u'(0+)."""
        raise NotImplementedError

    @staticmethod
    def _check_domain(x):
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0.0):
            raise ParameterError("utility argument must be nonnegative")
        return x if np.isscalar(x) or isinstance(x, (int, float)) else arr

    def _eval(self, x):
        raise NotImplementedError

    def _marginal(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerUtility(UtilityFunction):
    """u(x) = x**alpha with alpha in (0, 1]. alpha = 1 is risk neutral.

    The inverse marginal is undefined for alpha = 1 (u' is constant); the
    solver rejects that case and callers fall back to the closed-form
    degenerate answers.
    """

    alpha: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ParameterError(f"alpha must be in (0, 1], got {self.alpha}")

    @property
    def marginal_at_zero(self) -> float:  # type: ignore[override]
        return 1.0 if self.alpha == 1.0 else math.inf

    def _eval(self, x):
        if np.isscalar(x) or isinstance(x, (int, float)):
            return float(x) ** self.alpha
        return np.power(x, self.alpha)

    def _marginal(self, x):
        # alpha * x**(alpha-1); diverges at x = 0 for alpha < 1
        if self.alpha == 1.0:
            return np.ones_like(np.asarray(x, dtype=float)) if not np.isscalar(x) else 1.0
        with np.errstate(divide="ignore"):
            return self.alpha * np.power(np.asarray(x, dtype=float), self.alpha - 1.0)

    def inverse_marginal(self, z):
        if self.alpha == 1.0:
            raise ParameterError("linear utility has no invertible marginal")
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0.0):
            raise ParameterError("marginal value must be positive")
        # (z/alpha)**(1/(alpha-1)), decreasing in z; z -> inf maps to 0
        with np.errstate(over="ignore"):
            out = np.power(z / self.alpha, 1.0 / (self.alpha - 1.0))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LogShiftedUtility(UtilityFunction):
    """u(x) = ln(1 + x). Bounded marginal: u'(0) = 1."""

    marginal_at_zero: float = 1.0

    def _eval(self, x):
        out = np.log1p(np.asarray(x, dtype=float))
        return float(out) if out.ndim == 0 else out

    def _marginal(self, x):
        out = 1.0 / (1.0 + np.asarray(x, dtype=float))
        return float(out) if out.ndim == 0 else out

    def inverse_marginal(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0.0):
            raise ParameterError("marginal value must be positive")
        out = np.maximum(0.0, 1.0 / z - 1.0)
        return float(out) if out.ndim == 0 else out


class CustomUtility(UtilityFunction):
    """Caller-supplied utility. fn must satisfy fn(0) = 0 and be concave
    nondecreasing; marginal/inverse_marginal are optional until the solver
    needs them."""

    def __init__(
        self,
        fn: Callable[[float], float],
        marginal: Callable[[float], float] | None = None,
        inverse_marginal: Callable[[float], float] | None = None,
        marginal_at_zero: float = math.inf,
    ) -> None:
        if abs(fn(0.0)) > 1e-15:
            raise ParameterError("utility must satisfy u(0) = 0")
        self._fn = fn
        self._marg = marginal
        self._inv = inverse_marginal
        self.marginal_at_zero = float(marginal_at_zero)

    def _eval(self, x):
        if np.isscalar(x) or isinstance(x, (int, float)):
            return self._fn(float(x))
        return np.array([self._fn(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))

    def _marginal(self, x):
        if self._marg is None:
            raise ParameterError("this utility does not supply a marginal")
        if np.isscalar(x) or isinstance(x, (int, float)):
            return self._marg(float(x))
        return np.array([self._marg(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))

    def inverse_marginal(self, z):
        if self._inv is None:
            raise ParameterError("this utility does not supply an inverse marginal")
        if np.isscalar(z) or isinstance(z, (int, float)):
            return max(0.0, self._inv(float(z)))
        flat = np.array([self._inv(float(v)) for v in np.ravel(z)])
        return np.maximum(0.0, flat).reshape(np.shape(z))


def discounted_sum(values, delta: float) -> float:
    """Sum values[i] * delta**i with compensated summation.

    Offsets ascend from 0. math.fsum keeps the result exactly rounded, which
    matters for the long near-geometric tails produced elsewhere in the
    package.
    """
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1:
        raise ParameterError("values must be a one-dimensional sequence")
    if vals.size == 0:
        return 0.0
    if not np.all(np.isfinite(vals)):
        raise ParameterError("values must be finite")
    weighted = vals * np.power(delta, np.arange(vals.size, dtype=float))
    return math.fsum(weighted.tolist())
