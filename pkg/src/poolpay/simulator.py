"""Seeded Monte Carlo over Bernoulli share streams.

Each trial draws num_shares independent shares, each a block with
probability p. Under a fixed rule, share k realizes
sum_i u(B * w_i) * delta**i over the blocks found at offsets k..k+d-1,
where d is the rule's truncation depth at the internal tolerance; a block
near the start of the stream keeps any payment addressed to shares that do
not exist yet, which is what gives the first shares their warm-up premium.
Shares whose forward window runs past the end of the stream are excluded
from every estimate. The proportional scheme instead splits each block
evenly over the shares since the previous block; its trials run a few extra
draws past the stream end so the last round always closes and no share has
to be dropped.

Trials are seeded by spawning numpy SeedSequence((seed, trial)) and merged
in ascending trial order, so a config maps to bit-identical estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .allocation import AllocationRule, truncation_depth
from .core import ParameterError, PoolParams, UtilityFunction

#: discounted-utility tail dropped by the realized kernel
SIM_EPS = 1e-9

#: kernels at or below this length use exact direct convolution
_DIRECT_KERNEL_MAX = 128

#: numerical floor for the convergence comparisons, scaled by the mean;
#: keeps exact deterministic runs from failing on float residue
_CONV_ATOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """One simulation request.

    rule is an AllocationRule for fixed-rule runs, or None to run the
    proportional scheme. report_k bounds the leading per-share report;
    steady_window is the trailing fraction of counted shares behind the
    steady-state estimate.
    """

    params: PoolParams
    utility: UtilityFunction
    rule: AllocationRule | None
    num_shares: int
    trials: int
    seed: int
    report_k: int = 64
    steady_window: float = 0.5

    def __post_init__(self) -> None:
        if self.num_shares < 1:
            raise ParameterError(f"num_shares must be positive, got {self.num_shares}")
        if self.trials < 1:
            raise ParameterError(f"trials must be positive, got {self.trials}")
        if self.seed < 0:
            raise ParameterError(f"seed must be nonnegative, got {self.seed}")
        if self.report_k < 0:
            raise ParameterError(f"report_k must be nonnegative, got {self.report_k}")
        if not (0.0 < self.steady_window < 1.0):
            raise ParameterError(
                f"steady_window must be in (0, 1), got {self.steady_window}"
            )


@dataclass
class UkEstimates:
    """Across-trial estimates of the per-share realized value.

    per_k_* cover the leading min(report_k, counted) shares. window_profile
    is the across-trial mean value per share over the steady window.
    slope_mean/slope_se summarize the per-trial least-squares trend over that
    window; the spread is taken across trials, which stays calibrated even
    though neighbouring shares within a trial are correlated. paid_total and
    blocks_total are undiscounted conservation tallies over all in-stream
    shares of every trial; truncated_mass is the per-block weight the
    depth-d kernel drops.
    """

    config: SimConfig
    per_k_mean: np.ndarray
    per_k_se: np.ndarray
    steady_mean: float
    steady_se: float
    shares_counted: int
    window_start: int
    window_profile: np.ndarray
    half_means: tuple[float, float]
    half_ses: tuple[float, float]
    slope_mean: float
    slope_se: float
    reward_mean: float
    reward_se: float
    blocks_total: int
    paid_total: float
    truncated_mass: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Steady-state verdict for one simulation."""

    converged: bool
    steady_state_utility: float
    drift: float
    drift_se: float
    half_gap: float
    mean_reward_per_share: float
    balance_ok: bool
    #: steady_mean minus the caller-supplied closed-form value, if any
    analytic_gap: float | None = None


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    # documented splitting rule: one child stream per (seed, trial) pair
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, trial)))


def _correlate(b: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Forward-window sums: out[k] = sum_i kernel[i] * b[k+i]."""
    d = kernel.size
    if d == 1:
        return b * kernel[0]
    if d <= _DIRECT_KERNEL_MAX:
        full = np.convolve(b, kernel[::-1])
    else:
        full = fftconvolve(b, kernel[::-1])
    return full[d - 1 : d - 1 + b.size]


def _se(samples: list[float]) -> float:
    if len(samples) < 2 or all(s == samples[0] for s in samples):
        return 0.0  # identical trials have exactly zero spread
    return float(np.std(samples, ddof=1) / math.sqrt(len(samples)))


class _Tally:
    """Accumulates per-trial share values in fixed trial order."""

    def __init__(self, counted_n: int, report_k: int, steady_window: float) -> None:
        self.counted_n = counted_n
        self.k = min(report_k, counted_n)
        win_len = max(1, int(round(steady_window * counted_n)))
        win_len = min(win_len, counted_n)
        self.win_start = counted_n - win_len
        self.win_len = win_len
        if win_len >= 3:
            self._x = np.arange(win_len, dtype=float) - (win_len - 1) / 2.0
            self._sxx = float(self._x @ self._x)
        else:
            self._x, self._sxx = None, 0.0
        self.profile_sum = np.zeros(win_len)
        self.per_k_rows: list[np.ndarray] = []
        self.steady_means: list[float] = []
        self.h1: list[float] = []
        self.h2: list[float] = []
        self.slopes: list[float] = []
        self.reward_means: list[float] = []
        self.blocks = 0
        self.paid = 0.0

    def add(self, u_vals: np.ndarray, rewards: np.ndarray, nblocks: int, paid: float) -> None:
        self.per_k_rows.append(u_vals[: self.k].copy())
        w = u_vals[self.win_start : self.counted_n]
        self.profile_sum += w
        self.steady_means.append(float(w.mean()))
        half = self.win_len // 2
        if half >= 1:
            self.h1.append(float(w[:half].mean()))
            self.h2.append(float(w[half:].mean()))
        else:
            self.h1.append(float(w.mean()))
            self.h2.append(float(w.mean()))
        if self._x is not None:
            self.slopes.append(float(self._x @ w) / self._sxx)
        else:
            self.slopes.append(0.0)
        self.reward_means.append(float(rewards[: self.counted_n].mean()))
        self.blocks += int(nblocks)
        self.paid += float(paid)

    def finish(self, cfg: SimConfig, truncated_mass: float) -> UkEstimates:
        trials = len(self.steady_means)
        if self.k > 0:
            rows = np.vstack(self.per_k_rows)
            per_k_mean = rows.mean(axis=0)
            if trials > 1:
                per_k_se = rows.std(axis=0, ddof=1) / math.sqrt(trials)
                per_k_se[np.all(rows == rows[0], axis=0)] = 0.0
            else:
                per_k_se = np.zeros(self.k)
        else:
            per_k_mean = np.zeros(0)
            per_k_se = np.zeros(0)
        return UkEstimates(
            config=cfg,
            per_k_mean=per_k_mean,
            per_k_se=per_k_se,
            steady_mean=float(np.mean(self.steady_means)),
            steady_se=_se(self.steady_means),
            shares_counted=self.counted_n,
            window_start=self.win_start,
            window_profile=self.profile_sum / trials,
            half_means=(float(np.mean(self.h1)), float(np.mean(self.h2))),
            half_ses=(_se(self.h1), _se(self.h2)),
            slope_mean=float(np.mean(self.slopes)),
            slope_se=_se(self.slopes),
            reward_mean=float(np.mean(self.reward_means)),
            reward_se=_se(self.reward_means),
            blocks_total=self.blocks,
            paid_total=self.paid,
            truncated_mass=truncated_mass,
        )


def simulate_fixed_rule(cfg: SimConfig) -> UkEstimates:
    """Estimate per-share realized value under cfg.rule."""
    rule = cfg.rule
    if not isinstance(rule, AllocationRule):
        raise ParameterError("fixed-rule simulation needs an allocation rule")
    params, u = cfg.params, cfg.utility
    b_reward, delta, p = params.block_reward, params.delta, params.p

    d = truncation_depth(rule, params, u, SIM_EPS)
    t_shares = cfg.num_shares
    if t_shares <= d:
        raise ParameterError(
            f"num_shares must exceed the truncation depth {d} of this rule"
        )
    w = rule.weights_array(d)
    kernel_u = np.asarray(u(b_reward * w), dtype=float) * np.power(
        delta, np.arange(d, dtype=float)
    )
    kernel_r = b_reward * w

    if d > 1:
        # a block at t < d-1 would pay sum_{j>t} w_j to shares before the
        # stream; it keeps that, on top of its own w_0 cut
        tail = np.maximum(math.fsum(w.tolist()) - np.cumsum(w), 0.0)[: d - 1]
        bonus_u = np.asarray(u(b_reward * (w[0] + tail)), dtype=float) - float(
            u(b_reward * w[0])
        )
        bonus_r = b_reward * tail
    counted_n = t_shares - d + 1

    tally = _Tally(counted_n, cfg.report_k, cfg.steady_window)
    for t in range(cfg.trials):
        rng = _trial_rng(cfg.seed, t)
        b = (rng.random(t_shares) < p).astype(float)
        u_vals = _correlate(b, kernel_u)
        rewards = _correlate(b, kernel_r)
        if d > 1:
            hits = np.flatnonzero(b[: d - 1] > 0.0)
            if hits.size:
                u_vals[hits] += bonus_u[hits]
                rewards[hits] += bonus_r[hits]
        tally.add(u_vals, rewards, int(b.sum()), float(rewards.sum()))

    truncated_mass = max(rule.mass() - math.fsum(w.tolist()), 0.0)
    return tally.finish(cfg, truncated_mass)


def simulate_proportional(cfg: SimConfig) -> UkEstimates:
    """Estimate per-share realized value under round-proportional payout."""
    if cfg.rule is not None:
        raise ParameterError("proportional simulation takes rule=None")
    params, u = cfg.params, cfg.utility
    b_reward, delta, p = params.block_reward, params.delta, params.p
    t_shares = cfg.num_shares

    tally = _Tally(t_shares, cfg.report_k, cfg.steady_window)
    ks = np.arange(t_shares)
    for t in range(cfg.trials):
        rng = _trial_rng(cfg.seed, t)
        b = rng.random(t_shares) < p
        blocks = np.flatnonzero(b)
        nblocks = int(blocks.size)
        if nblocks == 0 or blocks[-1] != t_shares - 1:
            # run out the stream until the last round closes
            blocks = np.append(blocks, t_shares - 1 + int(rng.geometric(p)))
        idx = np.searchsorted(blocks, ks, side="left")
        t_close = blocks[idx]
        prev = np.where(idx > 0, blocks[idx - 1], -1)
        length = (t_close - prev).astype(float)
        u_vals = np.asarray(u(b_reward / length), dtype=float) * np.power(
            delta, (t_close - ks).astype(float)
        )
        rewards = b_reward / length
        tally.add(u_vals, rewards, nblocks, float(rewards.sum()))
    return tally.finish(cfg, 0.0)


def _balance(est: UkEstimates) -> tuple[float, bool]:
    params = est.config.params
    cap = params.p * params.block_reward
    mean = est.reward_mean
    rel = est.reward_se / mean if mean > 0.0 else 0.0
    ok = mean <= cap * (1.0 + 3.0 * rel) + 1e-12 * cap
    return mean, ok


def balance_report(est: UkEstimates) -> tuple[float, bool]:
    """Mean undiscounted reward per counted share, and whether it stays at
    or below p * B within three relative standard errors."""
    return _balance(est)


def convergence_report(
    est: UkEstimates, analytic_hint: float | None = None
) -> ConvergenceReport:
    """Judge whether the trailing window reached steady state.

    Converged means the per-share trend over the window is within two
    standard errors of flat and the two window halves agree within three
    pooled standard errors. Both error bars come from the across-trial
    spread (per-trial slopes, per-trial half means): within one trial
    neighbouring shares are paid from the same blocks, so residual-based
    error bars would be far too small. A single noisy trial therefore
    cannot certify convergence; deterministic single trials still can.
    steady_state_utility is zero when the run did not converge.
    analytic_hint, when given, is echoed back as the gap to the closed form
    and plays no part in the verdict.
    """
    slope, drift_se = est.slope_mean, est.slope_se

    atol = _CONV_ATOL * (1.0 + abs(est.steady_mean))
    flat = abs(slope) <= 2.0 * drift_se + atol
    gap = abs(est.half_means[0] - est.half_means[1])
    pooled = math.hypot(est.half_ses[0], est.half_ses[1])
    halves_ok = gap <= 3.0 * pooled + atol
    converged = bool(flat and halves_ok)

    mean_reward, balance_ok = _balance(est)
    return ConvergenceReport(
        converged=converged,
        steady_state_utility=est.steady_mean if converged else 0.0,
        drift=slope,
        drift_se=drift_se,
        half_gap=gap,
        mean_reward_per_share=mean_reward,
        balance_ok=balance_ok,
        analytic_gap=None if analytic_hint is None else est.steady_mean - analytic_hint,
    )
