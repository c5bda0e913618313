"""Seeded Monte Carlo estimation of the capacity and outage quantities.

This is the statistical oracle the closed forms in :mod:`fdnoma.analytic`
are validated against, so it deliberately shares no algebra with that
module: everything is computed per draw from the instantaneous SINR
kernels and averaged.

Streams are counter-based (Philox keyed by master seed and shard index),
so a given plan produces bit-identical estimates regardless of how the
shards are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    RateSet,
    SystemConfig,
    compute_rates,
    compute_sinrs,
    sample_channels,
)

_Z95 = 1.959963984540054  # two-sided 95% normal quantile

# Below this many observed outage events the normal-approximation CI is
# not trustworthy and the estimate is flagged instead of silently reported.
LOW_COUNT_THRESHOLD = 30


@dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo point estimate with a 95% normal-approximation CI."""

    mean: float
    ci_half_width: float
    n_samples: int
    low_count: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.ci_half_width < 0.0:
            raise ValueError("ci_half_width must be >= 0")


@dataclass(frozen=True)
class SimulationPlan:
    """Sample budget and stream layout of one estimation run."""

    n_samples: int = 1_000_000
    master_seed: int = 12345
    n_shards: int = 1

    def __post_init__(self):
        if self.n_shards < 1:
            raise ValueError("n_shards must be >= 1")
        if self.n_samples < self.n_shards:
            raise ValueError("n_samples must be >= n_shards")
        if not isinstance(self.master_seed, int) or isinstance(self.master_seed, bool):
            raise ValueError("master_seed must be an integer")


@dataclass(frozen=True)
class CapacityEstimates:
    u1: EstimateWithCI
    d1: EstimateWithCI
    u3: EstimateWithCI
    esc: EstimateWithCI


@dataclass(frozen=True)
class OutageEstimates:
    u1: EstimateWithCI
    u3: EstimateWithCI
    d1: EstimateWithCI


def shard_rng(master_seed: int, shard: int) -> np.random.Generator:
    """Independent counter-based stream for one shard of a plan."""
    return np.random.Generator(np.random.Philox(key=np.uint64([master_seed & 0xFFFFFFFFFFFFFFFF, shard])))


def _shard_sizes(plan: SimulationPlan) -> list[int]:
    base, rem = divmod(plan.n_samples, plan.n_shards)
    return [base + (1 if i < rem else 0) for i in range(plan.n_shards)]


def _shard_rates(cfg: SystemConfig, rng: np.random.Generator, size: int,
                 include_d2d: bool) -> RateSet:
    sinrs = compute_sinrs(cfg, sample_channels(cfg, rng, size))
    if include_d2d:
        return compute_rates(sinrs)
    # Degenerate baseline: no device-to-device receiver, so the far
    # symbol's bottleneck runs over three decode steps and the sum rate
    # has no device term.
    c1 = np.log2(1.0 + sinrs.gamma_b1_s1)
    c3 = np.log2(1.0 + np.minimum.reduce([
        sinrs.gamma_b2_s3, sinrs.gamma_b1_s3, sinrs.gamma_23_s3,
    ]))
    zero = np.zeros_like(c1)
    return RateSet(c1=c1, cd=zero, c3=c3, c_total=c1 + c3)


def _mean_ci(total: float, total_sq: float, n: int) -> EstimateWithCI:
    mean = total / n
    if n > 1:
        var = max(0.0, (total_sq - n * mean * mean) / (n - 1))
    else:
        var = 0.0
    return EstimateWithCI(mean=mean, ci_half_width=_Z95 * math.sqrt(var / n),
                          n_samples=n)


def estimate_ergodic_capacities(
    cfg: SystemConfig, plan: SimulationPlan, include_d2d: bool = True
) -> CapacityEstimates:
    """Sample means of the per-user rates and the sum rate.

    Deterministic for a fixed (cfg, plan): shards are merged in index
    order and each shard owns its own counter-based stream.
    """
    sums = np.zeros(4)
    sums_sq = np.zeros(4)
    for shard, size in enumerate(_shard_sizes(plan)):
        rates = _shard_rates(cfg, shard_rng(plan.master_seed, shard), size,
                             include_d2d)
        for i, x in enumerate((rates.c1, rates.cd, rates.c3, rates.c_total)):
            sums[i] += float(np.sum(x))
            sums_sq[i] += float(np.sum(np.square(x)))
    n = plan.n_samples
    u1, d1, u3, total = (_mean_ci(sums[i], sums_sq[i], n) for i in range(4))
    return CapacityEstimates(u1=u1, d1=d1, u3=u3, esc=total)


def estimate_outage(cfg: SystemConfig, plan: SimulationPlan) -> OutageEstimates:
    """Empirical outage fractions of the three receivers.

    Each receiver's outage event is evaluated on one joint channel draw
    (conditions that share a gain stay correlated, exactly as the joint
    probabilities require).  Estimates backed by fewer than
    ``LOW_COUNT_THRESHOLD`` outage events are flagged ``low_count``.
    """
    thr1 = 2.0 ** cfg.r1 - 1.0
    thr3 = 2.0 ** cfg.r3 - 1.0
    thr_d = 2.0 ** cfg.rd - 1.0
    fails = np.zeros(3, dtype=np.int64)
    for shard, size in enumerate(_shard_sizes(plan)):
        sinrs = compute_sinrs(
            cfg, sample_channels(cfg, shard_rng(plan.master_seed, shard), size)
        )
        u1_ok = (sinrs.gamma_b1_s3 > thr3) & (sinrs.gamma_b1_s1 > thr1)
        u3_ok = (sinrs.gamma_b2_s3 > thr3) & (sinrs.gamma_23_s3 > thr3)
        d1_ok = (sinrs.gamma_2d_s3 > thr3) & (sinrs.gamma_2d_s2 > thr_d)
        for i, ok in enumerate((u1_ok, u3_ok, d1_ok)):
            fails[i] += int(size - np.count_nonzero(ok))
    n = plan.n_samples

    def est(k: int) -> EstimateWithCI:
        p = k / n
        ci = _Z95 * math.sqrt(p * (1.0 - p) / n)
        return EstimateWithCI(mean=p, ci_half_width=ci, n_samples=n,
                              low_count=k < LOW_COUNT_THRESHOLD)

    return OutageEstimates(u1=est(int(fails[0])), u3=est(int(fails[1])),
                           d1=est(int(fails[2])))
