"""Threshold rules mapping error statistics to the score denominator.

Three strategies are provided, in increasing order of statistical caution:

* ``tau_mean_sigma``: mean + c * sigma of recent errors.
* ``tau_gaussian``: (1 - alpha)-quantile of the half-normal distribution
  |N(0, 1)| scaled by the running error scale, so a clean stream is flagged
  with probability alpha per point.
* ``tau_gumbel``: extreme-value correction bounding the probability that
  the *maximum* of n errors exceeds the threshold by alpha, via the Gumbel
  limit of the normalized half-normal maximum.

All thresholds are floored at a tiny positive constant because the anomaly
score divides by them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    GAUSSIAN,
    GUMBEL,
    MEAN_SIGMA,
    AlphaOutOfRange,
    ConfigError,
    NTooSmall,
    ThresholdRule,
)

__all__ = [
    "TAU_FLOOR",
    "GumbelConstants",
    "tau_mean_sigma",
    "half_normal_quantile",
    "tau_gaussian",
    "gumbel_quantile",
    "tau_gumbel",
    "tau_from_stats",
    "GUMBEL_N_CAP",
]

TAU_FLOOR = 1e-9

# Default cap on the automatic sample count fed to the Gumbel rule.
GUMBEL_N_CAP = 10**6


@dataclass(frozen=True, slots=True)
class GumbelConstants:
    """Norming constants under which the half-normal maximum is Gumbel.

    a_n = sqrt(2 ln(2n)),  b_n = a_n**2 - 0.5 ln(4 pi ln(2n)).

    Both are positive and nondecreasing for n >= 1.
    """

    n: int
    a_n: float
    b_n: float

    @classmethod
    def for_n(cls, n: int) -> "GumbelConstants":
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise NTooSmall(f"n must be an integer >= 1, got {n!r}")
        log2n = math.log(2.0 * n)
        a_n = math.sqrt(2.0 * log2n)
        b_n = 2.0 * log2n - 0.5 * math.log(4.0 * math.pi * log2n)
        return cls(n=n, a_n=a_n, b_n=b_n)


def tau_mean_sigma(mu: float, sigma: float, c: float) -> float:
    """Threshold mu + c * sigma, floored at TAU_FLOOR."""
    return max(mu + c * sigma, TAU_FLOOR)


# Rational approximation of the inverse normal CDF (Acklam's coefficients),
# refined below by Newton steps against erfc so the result is accurate to
# well under 1e-10 everywhere the tests look.
_A = (
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
)
_B = (
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
)
_P_LOW = 0.02425

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def _inv_norm_upper(r: float) -> float:
    """Return x with P(Z > x) = r for a standard normal Z, r in (0, 0.5].

    Working with the upper-tail mass directly keeps full precision for
    small r, where 1 - r would round away the information.
    """
    if r < _P_LOW:
        q = math.sqrt(-2.0 * math.log(r))
        x = (
            ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        ) / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
        x = -x  # tail branch yields the lower-tail quantile; mirror it
    else:
        q = 0.5 - r
        t = q * q
        x = (
            (((((_A[0] * t + _A[1]) * t + _A[2]) * t + _A[3]) * t + _A[4]) * t + _A[5])
            * q
        ) / (((((_B[0] * t + _B[1]) * t + _B[2]) * t + _B[3]) * t + _B[4]) * t + 1.0)
    # Newton refinement on the tail equation 0.5*erfc(x/sqrt(2)) = r.
    for _ in range(2):
        tail = 0.5 * math.erfc(x / _SQRT2)
        pdf = math.exp(-0.5 * x * x) / _SQRT2PI
        x += (tail - r) / pdf
    return x


def half_normal_quantile(alpha: float) -> float:
    """The (1 - alpha)-quantile of |N(0, 1)|.

    Equals the inverse standard normal CDF at 1 - alpha/2; accurate to well
    under 1e-8 absolute. Monotone decreasing in alpha.
    """
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha!r}")
    return _inv_norm_upper(alpha / 2.0)


def tau_gaussian(alpha: float, sigma_hat: float) -> float:
    """Half-normal quantile threshold: q_{1-alpha} * sigma_hat, floored."""
    return max(half_normal_quantile(alpha) * sigma_hat, TAU_FLOOR)


def gumbel_quantile(alpha: float) -> float:
    """The (1 - alpha)-quantile of the standard Gumbel law: -ln(-ln(1-alpha))."""
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha!r}")
    # log1p keeps precision for small alpha, where 1 - alpha rounds badly.
    return -math.log(-math.log1p(-alpha))


def tau_gumbel(alpha: float, sigma_hat: float, n: int) -> float:
    """Extreme-value threshold (q'_{1-alpha} + b_n) * sigma_hat / a_n, floored.

    Requires n >= 2 so that the norming constants sit above the degenerate
    region. Scales the standardized Gumbel quantile back to the error scale.
    """
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha!r}")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise NTooSmall(f"n must be an integer >= 2, got {n!r}")
    consts = GumbelConstants.for_n(n)
    return max((gumbel_quantile(alpha) + consts.b_n) * sigma_hat / consts.a_n, TAU_FLOOR)


def tau_from_stats(rule: ThresholdRule, stats, points_scored: int) -> float:
    """Resolve a threshold rule against running error statistics.

    The mean-sigma rule consumes mean and std directly. The quantile rules
    model a zero-mean error, so their scale is the root mean square of the
    errors. The Gumbel rule with ``n=None`` uses the number of points scored
    so far, clamped to [2, GUMBEL_N_CAP].
    """
    kind = rule.kind
    if kind == MEAN_SIGMA:
        return tau_mean_sigma(stats.mean, stats.std(), rule.c)
    sigma_hat = math.sqrt(stats.second_moment())
    if kind == GAUSSIAN:
        return tau_gaussian(rule.alpha, sigma_hat)
    if kind == GUMBEL:
        n = rule.n if rule.n is not None else points_scored
        n = max(2, min(int(n), GUMBEL_N_CAP))
        return tau_gumbel(rule.alpha, sigma_hat, n)
    raise ConfigError(f"unknown threshold rule kind: {kind!r}")
