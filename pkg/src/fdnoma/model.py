"""System parameters, channel-gain sampling, and instantaneous SINR/rate kernels.

Topology: a base station serves a near user directly and a far user through
a full-duplex relay-user; the relay simultaneously sends its own symbol to a
device-to-device receiver.  All links are flat Rayleigh, so every channel
gain is an exponential variate with the configured mean.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace

import numpy as np

ArrayLike = "float | np.ndarray"


class ConfigError(ValueError):
    """Invalid system parameter; names the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


_SUM_TOL = 1e-9  # slack for the power-split sum checks


@dataclass(frozen=True)
class SystemConfig:
    """All scalar parameters of the link model.

    Transmit SNRs are linear here; decibel values are accepted only at the
    config-file/CLI boundary (keys with an ``_db`` suffix).  Defaults are
    the bundled reference scenario used throughout the test suite.

    Power splits: ``theta1``/``theta3`` share the BS power between the near
    and far symbols, ``theta2``/``theta3p`` share the relay power between
    the device-to-device symbol and the forwarded far symbol.  ``sigma1``
    scales the residual self-interference at the relay, ``sigma3`` the
    residual of the already-decoded symbol at the near user, and ``sigma2``
    (fixed at 1) marks the device-to-device symbol the near user cannot
    cancel.  ``r1``/``r3``/``rd`` are the outage rate thresholds in
    bits/s/Hz.
    """

    theta1: float = 0.05
    theta3: float = 0.95
    theta2: float = 0.05
    theta3p: float = 0.95
    rho_b: float = 100.0
    rho_u: float = 50.0
    lambda_b1: float = 1.0
    lambda_b2: float = 0.5
    lambda_21: float = 0.5
    lambda_23: float = 0.5
    lambda_2d: float = 1.0
    lambda_22: float = 0.3
    sigma1: float = 0.0064
    sigma2: float = 1.0
    sigma3: float = 0.01
    r1: float = 1.0
    r3: float = 1.0
    rd: float = 1.0

    def __post_init__(self):
        for key in ("theta1", "theta3", "theta2", "theta3p", "rho_b", "rho_u",
                    "lambda_b1", "lambda_b2", "lambda_21", "lambda_23",
                    "lambda_2d", "lambda_22", "sigma1", "sigma2", "sigma3",
                    "r1", "r3", "rd"):
            v = getattr(self, key)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(key, f"expected a number, got {v!r}")
            if not math.isfinite(v):
                raise ConfigError(key, f"must be finite, got {v!r}")
            object.__setattr__(self, key, float(v))
        for key in ("lambda_b1", "lambda_b2", "lambda_21", "lambda_23",
                    "lambda_2d", "lambda_22"):
            if getattr(self, key) <= 0.0:
                raise ConfigError(key, "channel variance must be > 0")
        for key in ("rho_b", "rho_u"):
            if getattr(self, key) <= 0.0:
                raise ConfigError(key, "transmit SNR must be > 0")
        if not 0.0 < self.theta1 < self.theta3:
            raise ConfigError("theta1", "requires 0 < theta1 < theta3")
        if abs(self.theta1 + self.theta3 - 1.0) > _SUM_TOL:
            raise ConfigError("theta3", "theta1 + theta3 must equal 1")
        if not 0.0 <= self.theta2 < self.theta3p:
            raise ConfigError("theta2", "requires 0 <= theta2 < theta3p")
        if abs(self.theta2 + self.theta3p - 1.0) > _SUM_TOL:
            raise ConfigError("theta3p", "theta2 + theta3p must equal 1")
        for key in ("sigma1", "sigma3"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigError(key, "residual-cancellation level must lie in [0, 1]")
        if self.sigma2 != 1.0:
            raise ConfigError("sigma2", "uncancellable-interference level is fixed to 1")
        for key in ("r1", "r3", "rd"):
            if getattr(self, key) < 0.0:
                raise ConfigError(key, "rate threshold must be >= 0")

    @property
    def gt21_mean(self) -> float:
        """Mean gain of the composite residual interference at the near user."""
        return (self.sigma2 * self.theta2 + self.sigma3 * self.theta3p) * self.lambda_21

    @property
    def gt22_mean(self) -> float:
        """Mean gain of the residual self-interference at the relay."""
        return self.sigma1 * self.lambda_22

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelSample:
    """One joint draw of all link gains (scalars or aligned arrays)."""

    g_b1: ArrayLike
    g_b2: ArrayLike
    g_23: ArrayLike
    g_2d: ArrayLike
    gt_22: ArrayLike
    gt_21: ArrayLike


@dataclass(frozen=True)
class SinrSet:
    """The six instantaneous SINR/SNR values of the two transmission phases."""

    gamma_b2_s3: ArrayLike
    gamma_b1_s3: ArrayLike
    gamma_b1_s1: ArrayLike
    gamma_23_s3: ArrayLike
    gamma_2d_s3: ArrayLike
    gamma_2d_s2: ArrayLike


@dataclass(frozen=True)
class RateSet:
    """Instantaneous achievable rates in bits/s/Hz."""

    c1: ArrayLike
    cd: ArrayLike
    c3: ArrayLike
    c_total: ArrayLike


def sample_channels(cfg: SystemConfig, rng: np.random.Generator, size=None) -> ChannelSample:
    """Draw all link gains jointly.

    Gains are sampled directly as exponential variates of their configured
    means (statistically identical to squaring complex Gaussian channel
    coefficients, and cheaper).  Draw order is fixed so a given (cfg, seed)
    always yields the same sample, regardless of which sigma levels are
    zero.
    """
    return ChannelSample(
        g_b1=rng.exponential(cfg.lambda_b1, size),
        g_b2=rng.exponential(cfg.lambda_b2, size),
        g_23=rng.exponential(cfg.lambda_23, size),
        g_2d=rng.exponential(cfg.lambda_2d, size),
        gt_22=rng.exponential(cfg.gt22_mean, size),
        gt_21=rng.exponential(cfg.gt21_mean, size),
    )


def compute_sinrs(cfg: SystemConfig, s: ChannelSample) -> SinrSet:
    """Instantaneous SINRs for every decode step of both phases."""
    relay_noise = cfg.rho_u * s.gt_22 + 1.0
    near_noise = cfg.rho_u * s.gt_21 + 1.0
    return SinrSet(
        gamma_b2_s3=cfg.theta3 * cfg.rho_b * s.g_b2
        / (cfg.theta1 * cfg.rho_b * s.g_b2 + relay_noise),
        gamma_b1_s3=cfg.theta3 * cfg.rho_b * s.g_b1
        / (cfg.theta1 * cfg.rho_b * s.g_b1 + near_noise),
        gamma_b1_s1=cfg.theta1 * cfg.rho_b * s.g_b1 / near_noise,
        gamma_23_s3=cfg.theta3p * cfg.rho_u * s.g_23
        / (cfg.theta2 * cfg.rho_u * s.g_23 + 1.0),
        gamma_2d_s3=cfg.theta3p * cfg.rho_u * s.g_2d
        / (cfg.theta2 * cfg.rho_u * s.g_2d + 1.0),
        gamma_2d_s2=cfg.theta2 * cfg.rho_u * s.g_2d,
    )


def min_s3_sinr(sinrs: SinrSet) -> ArrayLike:
    """Bottleneck SINR of the far symbol across its four decode steps."""
    return np.minimum.reduce([
        sinrs.gamma_b2_s3,
        sinrs.gamma_b1_s3,
        sinrs.gamma_23_s3,
        sinrs.gamma_2d_s3,
    ])


def compute_rates(sinrs: SinrSet) -> RateSet:
    """Achievable rates: near user, device-to-device receiver, far user, sum."""
    c1 = np.log2(1.0 + sinrs.gamma_b1_s1)
    cd = np.log2(1.0 + sinrs.gamma_2d_s2)
    c3 = np.log2(1.0 + min_s3_sinr(sinrs))
    return RateSet(c1=c1, cd=cd, c3=c3, c_total=c1 + cd + c3)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    return 10.0 * math.log10(linear)


# Keys accepted in config documents: every SystemConfig field, with the
# transmit SNRs alternatively given in dB.
_DB_KEYS = {"rho_b_db": "rho_b", "rho_u_db": "rho_u"}
_CONFIG_KEYS = {f.name for f in fields(SystemConfig)}


def config_from_dict(doc: dict, base: SystemConfig | None = None) -> SystemConfig:
    """Build a SystemConfig from a flat key-value document.

    dB keys (``rho_b_db``/``rho_u_db``) are converted here and nowhere
    else; every other value is taken verbatim.  Unknown keys and
    linear/dB duplicates are rejected with the offending key named.
    """
    values = {}
    for key, raw in doc.items():
        if key in _DB_KEYS:
            target = _DB_KEYS[key]
            if target in doc:
                raise ConfigError(key, f"conflicts with {target}; give one or the other")
            if not isinstance(raw, (int, float)) or isinstance(raw, bool):
                raise ConfigError(key, f"expected a number, got {raw!r}")
            values[target] = db_to_linear(float(raw))
        elif key in _CONFIG_KEYS:
            values[key] = raw
        else:
            raise ConfigError(key, "unknown configuration key")
    if base is not None:
        merged = {f.name: getattr(base, f.name) for f in fields(SystemConfig)}
        merged.update(values)
        values = merged
    return SystemConfig(**values)


def load_config(path: str, base: SystemConfig | None = None) -> SystemConfig:
    """Read a JSON config file (flat key-value document)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config document must be a JSON object")
    return config_from_dict(doc, base=base)
