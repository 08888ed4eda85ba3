"""Shared domain types, configuration, and the error hierarchy.

Every streaming component exchanges the value types defined here:
:class:`Observation` on the way in, :class:`ScoredPoint` on the way out,
with :class:`DetectorConfig` plus :class:`ThresholdRule` describing how one
becomes the other.  Errors split into two families so callers (and the
command line) can map them onto stable exit codes: ``ConfigError`` for a bad
configuration (exit 2) and ``DataError`` for bad input data (exit 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

__all__ = [
    "StreamPadError",
    "ConfigError",
    "DataError",
    "InvalidOrder",
    "InvalidSeason",
    "InvalidRate",
    "InvalidWarmup",
    "InvalidSensitivity",
    "AlphaOutOfRange",
    "NTooSmall",
    "RateOutOfRange",
    "InvalidSpec",
    "NonFiniteInput",
    "NonMonotoneTick",
    "NotWarm",
    "InsufficientWindow",
    "MalformedRecord",
    "LengthMismatch",
    "EmptyInput",
    "NoPositives",
    "DegenerateLabels",
    "MissingColumn",
    "ParseError",
    "NonMonotoneTime",
    "NonFiniteValue",
    "Observation",
    "ScoredPoint",
    "ThresholdRule",
    "MEAN_SIGMA",
    "GAUSSIAN",
    "GUMBEL",
    "DetectorConfig",
    "validate_config",
]


class StreamPadError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(StreamPadError):
    """Invalid configuration; maps to exit code 2 at the command line."""


class DataError(StreamPadError):
    """Invalid or malformed data; maps to exit code 3 at the command line."""


class InvalidOrder(ConfigError):
    """A model order (p, d, q, P, D, Q) is negative or not an integer."""


class InvalidSeason(ConfigError):
    """Season length is < 1, or < 2 while a seasonal order is nonzero."""


class InvalidRate(ConfigError):
    """A learning or decay rate is outside its valid range."""


class InvalidWarmup(ConfigError):
    """Warmup is negative or shorter than the differencing depth."""


class InvalidSensitivity(ConfigError):
    """The mean-sigma multiplier c is not a finite positive number."""


class AlphaOutOfRange(ConfigError):
    """Significance level alpha is outside the open interval (0, 1)."""


class NTooSmall(ConfigError):
    """Sample count n is below the minimum required by the threshold rule."""


class RateOutOfRange(ConfigError):
    """An injection rate is outside its valid range."""


class InvalidSpec(ConfigError):
    """A synthetic-data specification violates one of its invariants."""


class NonFiniteInput(DataError):
    """An input value is NaN or infinite."""


class NonMonotoneTick(DataError):
    """Observation ticks did not strictly increase within one stream."""


class NotWarm(DataError):
    """Operation requires a full differencing history that is not yet full."""


class InsufficientWindow(DataError):
    """Too few points in the window to fit the requested model."""


class MalformedRecord(DataError):
    """A serialized state or scored record is truncated or inconsistent."""


class LengthMismatch(DataError):
    """Paired sequences have different lengths."""


class EmptyInput(DataError):
    """An operation that needs at least one element received none."""


class NoPositives(DataError):
    """Label sequence contains no positive (anomalous) entries."""


class DegenerateLabels(DataError):
    """Label sequence lacks at least one positive and one negative entry."""


class MissingColumn(DataError):
    """A required column is absent from the input file header."""


class ParseError(DataError):
    """A row of the input file could not be parsed; message names the row."""


class NonMonotoneTime(DataError):
    """Timestamps in the input file do not strictly increase."""


class NonFiniteValue(DataError):
    """A row of the input file holds a NaN or infinite value."""


@dataclass(frozen=True, slots=True)
class Observation:
    """One streaming input point.

    Args:
        t: Monotone integer tick (or epoch seconds). Ticks must strictly
            increase within one stream; the detector enforces this.
        value: The observed value. Must be finite; NaN and infinities are
            rejected at ingestion, never silently skipped.
        label: Optional ground truth, ``True`` meaning the point is a known
            anomaly. ``None`` when no ground truth exists.
    """

    t: int
    value: float
    label: bool | None = None


class ScoredPoint(NamedTuple):
    """The detector's per-point output record.

    Constructed only by the library, which guarantees
    ``error = |prediction - truth|`` and ``score = min(error/threshold, 1)``
    exactly, hence ``score == 1`` if and only if ``error >= threshold``.
    A NamedTuple rather than a dataclass: one record is built per scored
    observation, so construction cost matters.
    """

    t: int
    truth: float
    prediction: float
    error: float
    threshold: float
    score: float

    @property
    def flag(self) -> bool:
        """True when the point is flagged anomalous (score saturated at 1)."""
        return self.score >= 1.0


MEAN_SIGMA = "mean-sigma"
GAUSSIAN = "gaussian"
GUMBEL = "gumbel"

_RULE_KINDS = (MEAN_SIGMA, GAUSSIAN, GUMBEL)


@dataclass(frozen=True, slots=True)
class ThresholdRule:
    """Tagged strategy turning running error statistics into a threshold.

    Exactly one variant is active, selected by ``kind``:

    * ``"mean-sigma"``: threshold is ``mean + c * std`` of recent errors;
      only ``c`` is used.
    * ``"gaussian"``: threshold is the (1 - alpha)-quantile of the
      half-normal distribution scaled by the running error scale; only
      ``alpha`` is used.
    * ``"gumbel"``: extreme-value corrected quantile for the maximum of
      ``n`` errors; uses ``alpha`` and ``n``. ``n=None`` means "use the
      number of points scored so far" (capped, see thresholds module).

    Parameters irrelevant to the active kind are ignored but kept so rules
    can be built uniformly from flat configuration.
    """

    kind: str = MEAN_SIGMA
    c: float = 3.0
    alpha: float = 0.05
    n: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _RULE_KINDS:
            raise ConfigError(f"unknown threshold rule kind: {self.kind!r}")
        if self.kind == MEAN_SIGMA:
            if not (isinstance(self.c, (int, float)) and math.isfinite(self.c) and self.c > 0):
                raise InvalidSensitivity(f"c must be a finite positive number, got {self.c!r}")
        else:
            if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha < 1.0):
                raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.kind == GUMBEL and self.n is not None:
            if not (isinstance(self.n, int) and self.n >= 1):
                raise NTooSmall(f"n must be an integer >= 1 or None, got {self.n!r}")


@dataclass(frozen=True, slots=True)
class DetectorConfig:
    """Full configuration of the streaming detector.

    Defaults follow the reference configuration: orders (2,1,2) with
    seasonal orders (2,0,2) at season 52, learning rate 0.001, and a
    mean + 3 sigma threshold on recency-weighted error statistics.

    Args:
        p, d, q: Non-seasonal autoregressive, differencing, and moving
            average orders.
        P, D, Q: Seasonal counterparts, acting at lags that are multiples
            of ``s``.
        s: Season length; must be >= 2 whenever P, D, or Q is nonzero.
        learning_rate: Online gradient descent step size (> 0).
        threshold_rule: Strategy converting error statistics to a threshold.
        warmup: Observations consumed before any score is emitted. ``None``
            selects the natural warmup ``d + D*s + max(p, q, P*s, Q*s)``.
            When given explicitly it must be >= ``d + D*s``.
        learn_on_anomaly: When ``False``, points scoring exactly 1 update
            neither the model weights nor the error statistics (lag buffers
            still advance to preserve alignment).
        error_decay: Exponential decay rate for the error statistics, or
            ``None`` for exact global statistics over the whole stream.
    """

    p: int = 2
    d: int = 1
    q: int = 2
    P: int = 2
    D: int = 0
    Q: int = 2
    s: int = 52
    learning_rate: float = 0.001
    threshold_rule: ThresholdRule = field(default_factory=ThresholdRule)
    warmup: int | None = None
    learn_on_anomaly: bool = True
    error_decay: float | None = 0.01

    @property
    def differencing_depth(self) -> int:
        """Raw history length consumed by differencing: d + D*s."""
        return self.d + self.D * self.s

    @property
    def max_lag(self) -> int:
        """Largest lag any regression feature reaches back to."""
        return max(self.p, self.q, self.P * self.s, self.Q * self.s)

    @property
    def effective_warmup(self) -> int:
        """Warmup actually applied: explicit value or the natural default."""
        if self.warmup is not None:
            return self.warmup
        return self.differencing_depth + self.max_lag


def _require_order(name: str, value: object) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise InvalidOrder(f"{name} must be a non-negative integer, got {value!r}")


def validate_config(cfg: DetectorConfig) -> DetectorConfig:
    """Check every invariant of ``cfg``; return it unchanged if all hold.

    Raises the error naming the first violated field: :class:`InvalidOrder`
    for a negative order, :class:`InvalidSeason` for an unusable season
    length, :class:`InvalidRate` for a bad learning or decay rate, and
    :class:`InvalidWarmup` for a warmup shorter than the differencing depth.
    """
    for name in ("p", "d", "q", "P", "D", "Q"):
        _require_order(name, getattr(cfg, name))
    if not isinstance(cfg.s, int) or isinstance(cfg.s, bool) or cfg.s < 1:
        raise InvalidSeason(f"s must be an integer >= 1, got {cfg.s!r}")
    if (cfg.P > 0 or cfg.D > 0 or cfg.Q > 0) and cfg.s < 2:
        raise InvalidSeason(f"seasonal orders require s >= 2, got s={cfg.s}")
    lr = cfg.learning_rate
    if not (isinstance(lr, (int, float)) and math.isfinite(lr) and lr > 0):
        raise InvalidRate(f"learning_rate must be finite and > 0, got {lr!r}")
    if cfg.error_decay is not None:
        dec = cfg.error_decay
        if not (isinstance(dec, (int, float)) and 0.0 < dec < 1.0):
            raise InvalidRate(f"error_decay must lie in (0, 1) or be None, got {dec!r}")
    if cfg.warmup is not None:
        w = cfg.warmup
        if not isinstance(w, int) or isinstance(w, bool) or w < 0:
            raise InvalidWarmup(f"warmup must be a non-negative integer, got {w!r}")
        if w < cfg.differencing_depth:
            raise InvalidWarmup(
                f"warmup {w} is shorter than the differencing depth "
                f"{cfg.differencing_depth} (d + D*s)"
            )
    if not isinstance(cfg.threshold_rule, ThresholdRule):
        raise ConfigError("threshold_rule must be a ThresholdRule instance")
    return cfg
