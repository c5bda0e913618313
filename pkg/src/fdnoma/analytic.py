"""Closed-form and asymptotic link statistics.

Everything here is a pure function of a :class:`~fdnoma.model.SystemConfig`:
exact distribution functions of the per-draw SINRs, ergodic capacities of
the three receivers (exact and high-SNR), outage probabilities (exact,
high-SNR floors, diversity orders).  The Monte Carlo engine in
:mod:`fdnoma.montecarlo` estimates the same quantities from samples and is
used by the test suite to validate every expression in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import SystemConfig
from .numerics import (
    EULER_GAMMA,
    QuadratureSpec,
    exp_scaled_e1,
    integrate_adaptive,
)

LOG2_E = math.log2(math.e)

DEFAULT_QUADRATURE = QuadratureSpec()

# Below this, 1 - alpha*beta is treated as a removable singularity and the
# capacity integral is evaluated by quadrature instead of the closed form.
_SINGULARITY_TOL = 1e-9


@dataclass(frozen=True)
class DerivedConstants:
    """Grouped parameters the closed forms are written in.

    All are simple products/ratios of SystemConfig fields; keeping them in
    one place makes the formula bodies read like the algebra they come
    from.
    """

    alpha: float            # 1 / (theta1 * rho_b * lambda_b1): reciprocal mean power of the near user's own symbol
    beta: float             # rho_u * (sigma2*theta2 + sigma3*theta3p) * lambda_21: mean residual interference power at the near user
    d2d_snr: float          # theta2 * rho_u * lambda_2d: mean decode SNR of the device-to-device symbol
    relay_s3_power: float   # theta3 * rho_b * lambda_b2: mean power of the far symbol at the relay
    near_s3_power: float    # theta3 * rho_b * lambda_b1: mean power of the far symbol at the near user
    bs_inv_snr: float       # (1/rho_b) * (1/lambda_b2 + 1/lambda_b1)
    relay_inv_snr: float    # (1/rho_u) * (1/lambda_23 + 1/lambda_2d)
    si_excess: float        # sigma1*rho_u*lambda_22 - theta1*rho_b*lambda_b2
    near_s1_power: float    # theta1 * rho_b * lambda_b1
    psi: float              # theta3*rho_u*lambda_b1 / (beta - theta1*rho_u*lambda_b1)
    chi: float              # theta1*rho_u*lambda_b1 / (beta - theta1*rho_u*lambda_b1)
    thr1: float             # 2**r1 - 1
    thr3: float             # 2**r3 - 1
    thr_d: float            # 2**rd - 1
    margin3: float          # (theta3 - theta1*thr3) / thr3: far-symbol decode margin at BS-side receivers
    margin1: float          # min(margin3, theta1/thr1): joint decode margin of the near user
    relay_margin: float     # theta3p - theta2*thr3: far-symbol decode margin at relay-side receivers


def derive_constants(cfg: SystemConfig) -> DerivedConstants:
    beta = cfg.rho_u * cfg.gt21_mean
    hs_den = beta - cfg.theta1 * cfg.rho_u * cfg.lambda_b1
    if hs_den != 0.0:
        psi = cfg.theta3 * cfg.rho_u * cfg.lambda_b1 / hs_den
        chi = cfg.theta1 * cfg.rho_u * cfg.lambda_b1 / hs_den
    else:
        psi = math.inf
        chi = math.inf
    thr1 = 2.0 ** cfg.r1 - 1.0
    thr3 = 2.0 ** cfg.r3 - 1.0
    thr_d = 2.0 ** cfg.rd - 1.0
    margin3 = (cfg.theta3 - cfg.theta1 * thr3) / thr3 if thr3 > 0.0 else math.inf
    margin1 = min(margin3, cfg.theta1 / thr1 if thr1 > 0.0 else math.inf)
    return DerivedConstants(
        alpha=1.0 / (cfg.theta1 * cfg.rho_b * cfg.lambda_b1),
        beta=beta,
        d2d_snr=cfg.theta2 * cfg.rho_u * cfg.lambda_2d,
        relay_s3_power=cfg.theta3 * cfg.rho_b * cfg.lambda_b2,
        near_s3_power=cfg.theta3 * cfg.rho_b * cfg.lambda_b1,
        bs_inv_snr=(1.0 / cfg.lambda_b2 + 1.0 / cfg.lambda_b1) / cfg.rho_b,
        relay_inv_snr=(1.0 / cfg.lambda_23 + 1.0 / cfg.lambda_2d) / cfg.rho_u,
        si_excess=cfg.sigma1 * cfg.rho_u * cfg.lambda_22
        - cfg.theta1 * cfg.rho_b * cfg.lambda_b2,
        near_s1_power=cfg.theta1 * cfg.rho_b * cfg.lambda_b1,
        psi=psi,
        chi=chi,
        thr1=thr1,
        thr3=thr3,
        thr_d=thr_d,
        margin3=margin3,
        margin1=margin1,
        relay_margin=cfg.theta3p - cfg.theta2 * thr3,
    )


# ---------------------------------------------------------------------------
# Distribution functions
# ---------------------------------------------------------------------------

def cdf_q(q, c: DerivedConstants):
    """CDF of the near user's own-symbol SINR.

    F(q) = 1 - exp(-alpha*q) / (1 + alpha*beta*q); accepts scalars or
    arrays, values confined to [0, 1].
    """
    q = np.asarray(q, dtype=float)
    if np.any(q < 0.0):
        raise ValueError("SINR argument must be >= 0")
    out = 1.0 - np.exp(-c.alpha * q) / (1.0 + c.alpha * c.beta * q)
    return float(out) if out.ndim == 0 else out


def _sf_relay_decode(r: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    # P(relay decodes the far symbol at SINR > r); r below theta3/theta1.
    den = (cfg.theta3 - cfg.theta1 * r) * cfg.rho_b * cfg.lambda_b2
    return np.exp(-r / den) / (1.0 + cfg.sigma1 * cfg.rho_u * cfg.lambda_22 * r / den)


def _sf_near_decode(r: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    # P(near user decodes the far symbol at SINR > r).
    den = (cfg.theta3 - cfg.theta1 * r) * cfg.rho_b * cfg.lambda_b1
    return np.exp(-r / den) / (1.0 + cfg.rho_u * cfg.gt21_mean * r / den)


def _sf_far_decode(r: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    # P(far user decodes at SINR > r); r below theta3p/theta2.
    den = (cfg.theta3p - cfg.theta2 * r) * cfg.rho_u * cfg.lambda_23
    return np.exp(-r / den)


def _sf_d2d_decode(r: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    # P(device-to-device receiver decodes the far symbol at SINR > r).
    den = (cfg.theta3p - cfg.theta2 * r) * cfg.rho_u * cfg.lambda_2d
    return np.exp(-r / den)


def sinr_support(cfg: SystemConfig, include_d2d: bool = True) -> float:
    """Upper end of the bottleneck-SINR support.

    Interference-limited decode steps cannot exceed their power ratio, so
    the minimum over the decode chain lives on [0, r_max).
    """
    r_max = cfg.theta3 / cfg.theta1
    if include_d2d or cfg.theta2 > 0.0:
        if cfg.theta2 > 0.0:
            r_max = min(r_max, cfg.theta3p / cfg.theta2)
    return r_max


def cdf_min_sinr_s3(r, cfg: SystemConfig, include_d2d: bool = True):
    """CDF of the far symbol's bottleneck SINR.

    The four decode steps ride on independent channel gains, so the
    survival function of their minimum is the product of the per-step
    survival functions.  ``include_d2d=False`` drops the device-to-device
    decode step (used by the degenerate baseline where that receiver does
    not exist).  Returns 1 for r at or beyond the support edge.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r).astype(float)
    if np.any(r < 0.0):
        raise ValueError("SINR argument must be >= 0")
    r_max = sinr_support(cfg, include_d2d)
    out = np.ones_like(r)
    m = r < r_max
    rm = r[m]
    sf = _sf_relay_decode(rm, cfg) * _sf_near_decode(rm, cfg) * _sf_far_decode(rm, cfg)
    if include_d2d:
        sf = sf * _sf_d2d_decode(rm, cfg)
    out[m] = 1.0 - sf
    return float(out[0]) if scalar else out


def cdf_high_snr_bottleneck(n, cfg: SystemConfig):
    """High-SNR limit law of the bottleneck SINR (perfect self-interference
    cancellation): only the near user's decode step keeps fading, all other
    steps saturate at the power ratio.  Support is [0, theta3/theta1]."""
    n = np.asarray(n, dtype=float)
    scalar = n.ndim == 0
    n = np.atleast_1d(n).astype(float)
    if np.any(n < 0.0):
        raise ValueError("SINR argument must be >= 0")
    beta = cfg.rho_u * cfg.gt21_mean
    limit = cfg.theta3 / cfg.theta1
    out = np.ones_like(n)
    m = n < limit
    nm = n[m]
    num = nm * beta
    out[m] = num / (cfg.rho_u * cfg.lambda_b1 * (cfg.theta3 - cfg.theta1 * nm) + num)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Ergodic capacities
# ---------------------------------------------------------------------------

def ec_u1_exact(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Exact ergodic capacity of the near user in bits/s/Hz.

    Closed form (log2 e)/(1 - a*b) * [e^(1/b) Ei(-1/b) - e^a Ei(-a)] with
    a, b the derived alpha/beta.  a*b == 1 is a removable singularity and
    is evaluated by quadrature of the defining integral instead.
    """
    c = derive_constants(cfg)
    a, b = c.alpha, c.beta
    if b == 0.0:
        # Interference-free link.
        return LOG2_E * exp_scaled_e1(a)
    ab = a * b
    if abs(1.0 - ab) < _SINGULARITY_TOL:
        integrand = lambda q: math.exp(-a * q) / ((1.0 + q) * (1.0 + ab * q))
        return LOG2_E * integrate_adaptive(integrand, 0.0, math.inf, quad)
    return (LOG2_E / (1.0 - ab)) * (exp_scaled_e1(a) - exp_scaled_e1(1.0 / b))


def ec_u1_asymptotic(cfg: SystemConfig) -> float:
    """High-SNR approximation of the near user's ergodic capacity."""
    c = derive_constants(cfg)
    a, b = c.alpha, c.beta
    if b == 0.0:
        return -LOG2_E * (1.0 + a) * (EULER_GAMMA + math.log(a))
    ab = a * b
    if abs(1.0 - ab) < _SINGULARITY_TOL:
        raise ValueError("asymptotic form undefined where alpha*beta == 1")
    return (LOG2_E / (1.0 - ab)) * (
        (1.0 + 1.0 / b) * (EULER_GAMMA - math.log(b))
        - (1.0 + a) * (EULER_GAMMA + math.log(a))
    )


def ec_d1_exact(cfg: SystemConfig) -> float:
    """Exact ergodic capacity of the device-to-device receiver.

    Zero when the relay allocates no power to the device-to-device symbol
    (the degenerate baseline configuration).
    """
    if cfg.theta2 == 0.0:
        return 0.0
    c = derive_constants(cfg)
    return LOG2_E * exp_scaled_e1(1.0 / c.d2d_snr)


def ec_d1_asymptotic(cfg: SystemConfig) -> float:
    """Large-mean-SNR asymptote of the device-to-device capacity.

    Valid only as an asymptote: it goes negative for small mean SNR and is
    intentionally not clamped.
    """
    if cfg.theta2 == 0.0:
        return 0.0
    c = derive_constants(cfg)
    ad = c.d2d_snr
    return -LOG2_E * (1.0 + 1.0 / ad) * (EULER_GAMMA + math.log(1.0 / ad))


def ec_u3_exact(
    cfg: SystemConfig,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    include_d2d: bool = True,
) -> float:
    """Ergodic capacity of the far user in bits/s/Hz.

    No tractable closed form exists, so this integrates the bottleneck
    SINR's survival function over its finite support.
    """
    r_max = sinr_support(cfg, include_d2d)

    def integrand(r: float) -> float:
        if r >= r_max:
            return 0.0
        return (1.0 - cdf_min_sinr_s3(r, cfg, include_d2d)) / (1.0 + r)

    return LOG2_E * integrate_adaptive(integrand, 0.0, r_max, quad)


def _require_high_snr_regime(cfg: SystemConfig) -> None:
    if not (cfg.rho_b == cfg.rho_u and cfg.theta1 == cfg.theta2
            and cfg.theta3 == cfg.theta3p and cfg.sigma1 == 0.0):
        raise ValueError(
            "far-user asymptote requires rho_b == rho_u, theta1 == theta2, "
            "theta3 == theta3p and sigma1 == 0"
        )


def ec_u3_asymptotic(cfg: SystemConfig) -> float:
    """High-SNR asymptote of the far user's ergodic capacity.

    Only defined in the symmetric regime (equal transmit SNRs, equal power
    splits, perfect self-interference cancellation); any other config is a
    contract violation.
    """
    _require_high_snr_regime(cfg)
    c = derive_constants(cfg)
    psi, chi = c.psi, c.chi
    limit = cfg.theta3 / cfg.theta1
    if not math.isfinite(psi) or abs(1.0 - psi) < _SINGULARITY_TOL:
        return ec_u3_asymptotic_integral(cfg)
    return (LOG2_E / (1.0 - psi)) * (
        psi * (1.0 + chi) * math.log((limit + psi) / psi)
        - (psi + chi) * math.log(limit + 1.0)
    )


def ec_u3_asymptotic_integral(
    cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Integral form behind :func:`ec_u3_asymptotic`, for verification."""
    _require_high_snr_regime(cfg)
    limit = cfg.theta3 / cfg.theta1

    def integrand(n: float) -> float:
        if n >= limit:
            return 0.0
        return (1.0 - cdf_high_snr_bottleneck(n, cfg)) / (1.0 + n)

    return LOG2_E * integrate_adaptive(integrand, 0.0, limit, quad)


def esc(cfg: SystemConfig, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Exact ergodic sum capacity: near user + device link + far user."""
    return ec_u1_exact(cfg, quad) + ec_d1_exact(cfg) + ec_u3_exact(cfg, quad)


def esc_asymptotic(cfg: SystemConfig) -> float:
    """Sum of the three high-SNR capacity asymptotes (far-user regime
    restrictions propagate)."""
    return ec_u1_asymptotic(cfg) + ec_d1_asymptotic(cfg) + ec_u3_asymptotic(cfg)


# ---------------------------------------------------------------------------
# Outage probabilities
# ---------------------------------------------------------------------------

def op_u1(cfg: SystemConfig) -> float:
    """Outage probability of the near user.

    Outage = failing to decode the far symbol at rate r3 or, having
    decoded it, failing to decode its own symbol at rate r1.  Both events
    share the same channel draw, which the joint margin handles exactly.
    Returns 1 when the far-symbol threshold exceeds the SINR support.
    """
    c = derive_constants(cfg)
    if c.margin3 <= 0.0:
        return 1.0
    phi = c.margin1
    if math.isinf(phi):
        return 0.0  # both thresholds zero: decoding always succeeds
    scale = phi * cfg.rho_b * cfg.lambda_b1
    return 1.0 - math.exp(-1.0 / scale) * (scale / (scale + c.beta))


def op_u3(cfg: SystemConfig) -> float:
    """Outage probability of the far user.

    Outage = the relay failing to decode the far symbol, or the far user
    failing to decode the relayed copy; the two hops fade independently.
    """
    c = derive_constants(cfg)
    if c.margin3 <= 0.0 or c.relay_margin <= 0.0:
        return 1.0
    exponent = c.thr3 / (c.relay_margin * cfg.rho_u * cfg.lambda_23) \
        + 1.0 / (c.margin3 * cfg.rho_b * cfg.lambda_b2)
    si_ratio = cfg.sigma1 * cfg.lambda_22 * cfg.rho_u \
        / (c.margin3 * cfg.rho_b * cfg.lambda_b2)
    return 1.0 - math.exp(-exponent) / (1.0 + si_ratio)


def op_d1(cfg: SystemConfig) -> float:
    """Outage probability of the device-to-device receiver, product form.

    The two decode conditions (forwarded far symbol at rate r3, own symbol
    at rate rd) are combined as if independent even though they ride on
    the same channel gain; :func:`op_d1_joint` keeps the shared-gain
    dependence and therefore matches simulation exactly.  Undefined when
    theta2 == 0 (no device-to-device symbol is transmitted).
    """
    _require_d2d(cfg)
    c = derive_constants(cfg)
    if c.relay_margin <= 0.0:
        return 1.0
    exponent = c.thr3 / (c.relay_margin * cfg.rho_u * cfg.lambda_2d) \
        + c.thr_d / (cfg.theta2 * cfg.rho_u * cfg.lambda_2d)
    return 1.0 - math.exp(-exponent)


def op_d1_joint(cfg: SystemConfig) -> float:
    """Exact outage probability of the device-to-device receiver.

    Both decode conditions are monotone in the single link gain, so the
    joint success region is the gain exceeding the larger of the two
    per-condition cutoffs.
    """
    _require_d2d(cfg)
    c = derive_constants(cfg)
    if c.relay_margin <= 0.0:
        return 1.0
    cutoff = max(
        c.thr3 / (c.relay_margin * cfg.rho_u),
        c.thr_d / (cfg.theta2 * cfg.rho_u),
    )
    return 1.0 - math.exp(-cutoff / cfg.lambda_2d)


def _require_d2d(cfg: SystemConfig) -> None:
    if cfg.theta2 == 0.0:
        raise ValueError(
            "device-to-device outage undefined: relay allocates no power "
            "to the device symbol (theta2 == 0)"
        )


@dataclass(frozen=True)
class AsymptoticOutage:
    """High-SNR outage approximations for the three receivers."""

    u1: float
    u3: float
    d1: float


def op_asymptotic(cfg: SystemConfig, epsilon: float) -> AsymptoticOutage:
    """High-SNR outage approximations under rho_u = epsilon * rho_b.

    With residual interference present the near and far users hit
    constant error floors; with perfect cancellation the far user and the
    device receiver decay like 1/SNR (the near user keeps a floor from
    the uncancellable device symbol).  Values are clipped to [0, 1].
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    _require_d2d(cfg)
    c = derive_constants(cfg)

    if c.margin3 <= 0.0:
        u1 = 1.0
    elif math.isinf(c.margin1):
        u1 = 0.0
    elif cfg.sigma3 > 0.0:
        u1 = 1.0 - 1.0 / (1.0 + c.beta / (c.margin1 * cfg.rho_b * cfg.lambda_b1))
    else:
        u1 = 1.0 - 1.0 / (
            1.0 + epsilon * cfg.sigma2 * cfg.theta2 * cfg.lambda_21
            / (c.margin1 * cfg.lambda_b1)
        )

    if c.margin3 <= 0.0 or c.relay_margin <= 0.0:
        u3 = 1.0
    elif cfg.sigma1 > 0.0:
        u3 = 1.0 - 1.0 / (
            1.0 + epsilon * cfg.sigma1 * cfg.lambda_22
            / (c.margin3 * cfg.lambda_b2)
        )
    else:
        u3 = min(
            1.0,
            c.thr3 / (c.relay_margin * cfg.rho_u * cfg.lambda_23)
            + 1.0 / (c.margin3 * cfg.rho_b * cfg.lambda_b2),
        )

    if c.relay_margin <= 0.0:
        d1 = 1.0
    else:
        d1 = min(
            1.0,
            c.thr3 / (c.relay_margin * cfg.rho_u * cfg.lambda_2d)
            + c.thr_d / (cfg.theta2 * cfg.rho_u * cfg.lambda_2d),
        )

    return AsymptoticOutage(u1=u1, u3=u3, d1=d1)


def diversity_order(op_curve: Sequence[tuple[float, float]]) -> float:
    """High-SNR decay exponent of an outage curve.

    Least-squares slope of -log10(OP) against log10(rho_b); robust to
    Monte Carlo jitter, unlike a two-point difference.  Points must have
    strictly increasing rho_b and OP in (0, 1]; an OP of exactly 0 means
    the curve fell below the numerical floor and cannot be fitted.
    """
    pts = list(op_curve)
    if len(pts) < 2:
        raise ValueError("need at least two (rho_b, OP) points")
    rho = np.array([p[0] for p in pts], dtype=float)
    op = np.array([p[1] for p in pts], dtype=float)
    if np.any(np.diff(rho) <= 0.0):
        raise ValueError("rho_b values must be strictly increasing")
    if np.any(op == 0.0):
        raise ValueError(
            "OP of 0 is below the numerical floor; increase the sample "
            "count or use the analytic outage curve"
        )
    if np.any((op < 0.0) | (op > 1.0)):
        raise ValueError("OP values must lie in (0, 1]")
    slope = np.polyfit(np.log10(rho), -np.log10(op), 1)[0]
    return float(slope)
