"""Special-function and quadrature substrate for the capacity closed forms.

Two pieces live here: the exponential integral Ei evaluated on the negative
real axis (the only region the rate formulas touch), and a deterministic
globally-adaptive quadrature used both to evaluate the intractable
far-user capacity integral and as an independent oracle for the closed
forms.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

EULER_GAMMA = 0.5772156649015329

# Series/continued-fraction switchover for Ei; measured agreement between
# the two branches at this point is ~3e-13 relative (>= 12 significant
# digits).  Larger switchpoints lose the 12th digit to series cancellation.
_EI_SWITCH = 5.0


def _gl15_weights():
    nodes, weights = np.polynomial.legendre.leggauss(15)
    w = [float(v) for v in weights * (2.0 / weights.sum())]
    # Nudge the centre weight until the in-order float sum is exactly 2,
    # so constant integrands are reproduced without rounding residue.
    for _ in range(5):
        s = 0.0
        for v in w:
            s += v
        if s == 2.0:
            break
        w[7] += 2.0 - s
    return tuple(float(v) for v in nodes), tuple(w)


_GL_NODES, _GL_WEIGHTS = _gl15_weights()


class QuadratureError(RuntimeError):
    """Requested tolerance not met within the subdivision budget.

    Carries the best available estimate and a bound on its error so
    callers can decide whether the partial result is usable.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for :func:`integrate_adaptive`."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0.0):
            raise ValueError("rel_tol must be > 0")
        if not (self.abs_tol >= 0.0):
            raise ValueError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


def exp_integral_ei(x: float) -> float:
    """Exponential integral Ei(x) for strictly negative real x.

    Ei(x) = integral of e^a / a from -infinity to x.  Uses the convergent
    power series around the origin for |x| <= 6 and a continued fraction
    (evaluated with the modified Lentz scheme) beyond.  The result is
    strictly negative and finite for every x < 0.
    """
    if not math.isfinite(x):
        raise ValueError(f"Ei argument must be finite, got {x!r}")
    if x >= 0.0:
        raise ValueError(f"Ei is only supported for negative arguments, got {x!r}")
    u = -x
    if u <= _EI_SWITCH:
        return _ei_neg_series(u)
    return -math.exp(-u) * exp_scaled_e1(u)


def exp_scaled_e1(x: float) -> float:
    """e^x * E1(x) for x > 0, where E1(x) = -Ei(-x).

    Stable for arbitrarily large x (the raw E1 underflows, the scaled
    form decays like 1/x), which is what the capacity formulas need when
    an effective SNR becomes tiny.
    """
    if not (x > 0.0) or not math.isfinite(x):
        raise ValueError(f"scaled E1 requires finite x > 0, got {x!r}")
    if x <= _EI_SWITCH:
        return -math.exp(x) * _ei_neg_series(x)
    return _e1_scaled_cf(x)


def _ei_neg_series(u: float) -> float:
    # Ei(-u) = gamma + ln(u) + sum_k (-u)^k / (k * k!); fsum keeps the
    # alternating cancellation near the switchover at the few-ulp level.
    term = 1.0  # (-u)^k / k!
    contribs = [EULER_GAMMA, math.log(u)]
    for k in range(1, 500):
        term *= -u / k
        contrib = term / k
        contribs.append(contrib)
        if abs(contrib) < 1e-20:
            break
    return math.fsum(contribs)


def _e1_scaled_cf(x: float) -> float:
    # e^x * E1(x) = 1 / ((x+1) - 1^2/((x+3) - 2^2/((x+5) - ...)))
    # evaluated by the modified Lentz algorithm.
    tiny = 1e-300
    f = x + 1.0
    c = f
    d = 0.0
    for j in range(1, 300):
        a = -float(j * j)
        b = x + 2.0 * j + 1.0
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return 1.0 / f


def integrate_adaptive(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    spec: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Globally adaptive quadrature of f over [lower, upper].

    upper may be math.inf; the tail is folded onto [0, 1) through
    x = lower + t/(1-t) instead of being truncated.  Subdivision always
    attacks the panel with the largest error estimate (15-point
    Gauss-Legendre value vs. the sum over its halves), so the result is
    a pure function of the inputs: identical calls give bit-identical
    output.

    Raises QuadratureError when the error bound still exceeds
    max(abs_tol, rel_tol * |estimate|) after max_subdivisions splits.
    """
    if not math.isfinite(lower):
        raise ValueError("lower bound must be finite")
    if math.isnan(upper):
        raise ValueError("upper bound must not be NaN")
    if upper == lower:
        return 0.0
    if upper < lower:
        raise ValueError("upper bound must exceed lower bound")

    if math.isinf(upper):
        base = lower

        def g(t: float) -> float:
            w = 1.0 - t
            return f(base + t / w) / (w * w)

        return _integrate_finite(g, 0.0, 1.0, spec)
    return _integrate_finite(f, lower, upper, spec)


def _gl15(f: Callable[[float], float], a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    s = 0.0
    for xi, wi in zip(_GL_NODES, _GL_WEIGHTS):
        s += wi * f(mid + half * xi)
    return half * s


class _Panel:
    __slots__ = ("a", "b", "left", "right", "value", "err", "retired")

    def __init__(self, f, a: float, b: float, coarse: float):
        mid = 0.5 * (a + b)
        self.a = a
        self.b = b
        self.left = _gl15(f, a, mid)
        self.right = _gl15(f, mid, b)
        self.value = self.left + self.right
        self.err = abs(self.value - coarse)
        self.retired = False
        if not math.isfinite(self.value):
            raise ValueError(
                f"integrand returned a non-finite value on [{a!r}, {b!r}]"
            )


def _integrate_finite(
    f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec
) -> float:
    root = _Panel(f, a, b, _gl15(f, a, b))
    panels = [root]
    heap = [(-root.err, 0, root)]
    seq = 1

    def totals():
        v = 0.0
        e = 0.0
        for p in panels:
            v += p.value
            e += p.err
        return v, e

    value, err = totals()
    for _ in range(spec.max_subdivisions):
        if err <= max(spec.abs_tol, spec.rel_tol * abs(value)):
            return value
        while heap and heap[0][2].retired:
            heapq.heappop(heap)
        if not heap:
            break
        _, _, worst = heapq.heappop(heap)
        worst.retired = True
        mid = 0.5 * (worst.a + worst.b)
        if mid <= worst.a or mid >= worst.b:
            # Interval narrower than float spacing: cannot refine further.
            worst.retired = False
            break
        kids = (
            _Panel(f, worst.a, mid, worst.left),
            _Panel(f, mid, worst.b, worst.right),
        )
        panels.remove(worst)
        for kid in kids:
            panels.append(kid)
            heapq.heappush(heap, (-kid.err, seq, kid))
            seq += 1
        value, err = totals()

    if err <= max(spec.abs_tol, spec.rel_tol * abs(value)):
        return value
    raise QuadratureError(
        f"tolerance not met after {spec.max_subdivisions} subdivisions "
        f"(estimate {value!r}, error bound {err!r})",
        estimate=value,
        error_bound=err,
    )
