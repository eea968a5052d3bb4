"""Fixed allocation rules: how much of a block reward each past share gets.

A rule is a stationary weight profile w_i over share offsets i >= 0. The
share that finds a block receives fraction w_0 of the reward, the previous
share w_1, and so on, independent of pool history. Total promised mass
sum(w_i) must not exceed 1; promising more is a Ponzi scheme and is rejected
at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ParameterError, PonziRuleError, PoolParams, UtilityFunction

#: slack allowed on the mass <= 1 check, absorbs float noise in profiles
MASS_TOL = 1e-12


class AllocationRule:
    """Weight profile shared interface. Subclasses are small frozen records."""

    def weight(self, i: int) -> float:
        """w_i for offset i >= 0."""
        raise NotImplementedError

    def mass(self) -> float:
        """Total promised fraction of one block reward, sum of all w_i."""
        raise NotImplementedError

    def window(self) -> int | None:
        """Number of offsets with nonzero weight, None when infinite."""
        raise NotImplementedError

    def weights_array(self, d: int) -> np.ndarray:
        """First d weights as a float array."""
        if d < 0:
            raise ParameterError(f"depth must be nonnegative, got {d}")
        return np.array([self.weight(i) for i in range(d)], dtype=float)

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def _check_offset(i: int) -> None:
        if i < 0:
            raise ParameterError(f"offset must be nonnegative, got {i}")


@dataclass(frozen=True)
class Solo(AllocationRule):
    """The block finder keeps everything: w_0 = 1."""

    def weight(self, i: int) -> float:
        self._check_offset(i)
        return 1.0 if i == 0 else 0.0

    def mass(self) -> float:
        return 1.0

    def window(self) -> int:
        return 1

    def to_dict(self) -> dict:
        return {"kind": "solo"}


@dataclass(frozen=True)
class Pplns(AllocationRule):
    """Even split over the last n shares: w_i = 1/n for i < n."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ParameterError(f"window must be an integer, got {self.n!r}")
        if self.n < 1:
            raise ParameterError(f"window must be at least 1, got {self.n}")

    def weight(self, i: int) -> float:
        self._check_offset(i)
        return 1.0 / self.n if i < self.n else 0.0

    def mass(self) -> float:
        return 1.0  # n equal slices of 1/n by definition

    def window(self) -> int:
        return int(self.n)

    def weights_array(self, d: int) -> np.ndarray:
        if d < 0:
            raise ParameterError(f"depth must be nonnegative, got {d}")
        w = np.zeros(d)
        w[: min(d, self.n)] = 1.0 / self.n
        return w

    def to_dict(self) -> dict:
        return {"kind": "pplns", "n": int(self.n)}


@dataclass(frozen=True)
class Geometric(AllocationRule):
    """Exponentially decaying split: w_i = c * r**i over all i >= 0."""

    c: float
    r: float

    def __post_init__(self) -> None:
        if not (0.0 < self.c <= 1.0) or not math.isfinite(self.c):
            raise ParameterError(f"c must be in (0, 1], got {self.c}")
        if not (0.0 < self.r < 1.0):
            raise ParameterError(f"r must be in (0, 1), got {self.r}")
        if self.mass() > 1.0 + MASS_TOL:
            raise PonziRuleError(
                f"geometric profile pays mass {self.mass():.17g} > 1 per block"
            )

    def weight(self, i: int) -> float:
        self._check_offset(i)
        return self.c * self.r ** i

    def mass(self) -> float:
        return self.c / (1.0 - self.r)

    def window(self) -> None:
        return None

    def weights_array(self, d: int) -> np.ndarray:
        if d < 0:
            raise ParameterError(f"depth must be nonnegative, got {d}")
        return self.c * np.power(self.r, np.arange(d, dtype=float))

    def to_dict(self) -> dict:
        return {"kind": "geometric", "c": float(self.c), "r": float(self.r)}


@dataclass(frozen=True)
class Custom(AllocationRule):
    """Explicit finite weight profile."""

    weights: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        ws = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if len(ws) == 0:
            raise ParameterError("custom profile needs at least one weight")
        if any(not math.isfinite(w) or w < 0.0 for w in ws):
            raise ParameterError("custom weights must be finite and nonnegative")
        if self.mass() > 1.0 + MASS_TOL:
            raise PonziRuleError(
                f"custom profile pays mass {self.mass():.17g} > 1 per block"
            )

    def weight(self, i: int) -> float:
        self._check_offset(i)
        return self.weights[i] if i < len(self.weights) else 0.0

    def mass(self) -> float:
        return math.fsum(self.weights)

    def window(self) -> int:
        return len(self.weights)

    def weights_array(self, d: int) -> np.ndarray:
        if d < 0:
            raise ParameterError(f"depth must be nonnegative, got {d}")
        w = np.zeros(d)
        take = min(d, len(self.weights))
        w[:take] = self.weights[:take]
        return w

    def to_dict(self) -> dict:
        return {"kind": "custom", "weights": [float(w) for w in self.weights]}


def rule_from_dict(data: dict) -> AllocationRule:
    """Parse the wire form, e.g. {"kind": "pplns", "n": 125}."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ParameterError("rule must be an object with a 'kind' field")
    kind = data["kind"]
    try:
        if kind == "solo":
            return Solo()
        if kind == "pplns":
            return Pplns(n=int(data["n"]))
        if kind == "geometric":
            return Geometric(c=float(data["c"]), r=float(data["r"]))
        if kind == "custom":
            return Custom(weights=tuple(float(w) for w in data["weights"]))
    except KeyError as exc:
        raise ParameterError(f"rule kind {kind!r} is missing field {exc}") from None
    raise ParameterError(f"unknown rule kind {kind!r}")


def truncation_depth(
    rule: AllocationRule,
    params: PoolParams,
    u: UtilityFunction,
    eps: float,
) -> int:
    """Smallest depth d whose dropped tail cannot matter at tolerance eps.

    The discounted utility tail past offset d is at most
    u(B) * delta**d / (1 - delta), a uniform bound independent of the rule.
    The result is capped at the rule's natural window when that is finite
    and floored at 1 so a truncated profile always pays something.
    """
    if not (eps > 0.0) or not math.isfinite(eps):
        raise ParameterError(f"eps must be positive and finite, got {eps}")
    delta = params.delta
    top = float(u(params.block_reward)) / (1.0 - delta)
    cap = rule.window()

    if top < eps:
        d = 1
    else:
        # log estimate, then walk to the exact smallest d satisfying the bound
        d = max(1, math.ceil(math.log(eps / top) / math.log(delta)))
        while d > 1 and top * delta ** (d - 1) < eps:
            d -= 1
        while top * delta ** d >= eps:
            d += 1
    if cap is not None:
        d = min(d, cap)
    return int(d)
