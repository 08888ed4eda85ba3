"""Single-pass moment estimators and an online standardizer."""

from __future__ import annotations

import math

from .core import InvalidRate, MalformedRecord, NonFiniteInput

__all__ = ["STD_FLOOR", "RunningStats", "OnlineScaler"]

# Degenerate (constant) streams must never divide by zero downstream.
STD_FLOOR = 1e-9


class RunningStats:
    """Incremental mean and variance, exact or recency-weighted.

    With ``decay=None`` the estimator reproduces exact batch moments of
    everything seen so far (Welford update, population variance).  With
    ``decay`` set to some lambda in (0, 1) it switches to exponentially
    weighted moments starting from zero:

        mean <- (1 - lambda) * mean + lambda * x

    with the matching variance recursion.  Updates are single-pass and
    order-dependent; re-running the same sequence yields bit-identical
    state.
    """

    __slots__ = ("decay", "count", "mean", "_m2", "_var")

    def __init__(self, decay: float | None = None) -> None:
        if decay is not None and not (0.0 < decay < 1.0):
            raise InvalidRate(f"decay must lie in (0, 1) or be None, got {decay!r}")
        self.decay = decay
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0   # sum of squared deviations (global mode)
        self._var = 0.0  # exponentially weighted variance (decay mode)

    def update(self, x: float) -> None:
        if not math.isfinite(x):
            raise NonFiniteInput(f"cannot update statistics with {x!r}")
        self.count += 1
        if self.decay is None:
            delta = x - self.mean
            self.mean += delta / self.count
            self._m2 += delta * (x - self.mean)
        else:
            lam = self.decay
            diff = x - self.mean
            incr = lam * diff
            self.mean += incr
            self._var = (1.0 - lam) * (self._var + diff * incr)

    def variance(self) -> float:
        """Population variance (global) or decayed variance; 0 when empty."""
        if self.count == 0:
            return 0.0
        if self.decay is None:
            return self._m2 / self.count
        return self._var

    def std(self) -> float:
        return math.sqrt(self.variance())

    def second_moment(self) -> float:
        """Mean square about zero: mean**2 + variance.

        This is the scale estimate used by threshold rules that model the
        error as zero-mean (the quantile rules), as opposed to the
        mean-plus-sigma rule which uses mean() and std() directly.
        """
        return self.mean * self.mean + self.variance()

    def to_state(self) -> dict:
        return {
            "decay": self.decay,
            "count": self.count,
            "mean": self.mean,
            "m2": self._m2,
            "var": self._var,
        }

    @classmethod
    def from_state(cls, state: dict) -> "RunningStats":
        try:
            st = cls(state["decay"])
            st.count = int(state["count"])
            st.mean = float(state["mean"])
            st._m2 = float(state["m2"])
            st._var = float(state["var"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad RunningStats state: {exc}") from exc
        return st


class OnlineScaler:
    """Online standardizer: learn mean/std incrementally, transform as you go.

    ``transform(x) = (x - mean) / max(std, STD_FLOOR)`` using the statistics
    accumulated so far; before the first update the transform is the
    identity.  ``inverse_transform(transform(x)) == x`` to within 1e-12 once
    the running std clears the floor.
    """

    __slots__ = ("stats", "_scale")

    def __init__(self) -> None:
        self.stats = RunningStats()
        self._scale = STD_FLOOR  # floored std, recomputed once per update

    def learn_transform(self, x: float) -> float:
        """Update the running statistics with ``x``, then standardize it."""
        stats = self.stats
        stats.update(x)
        s = stats.std()
        self._scale = s if s > STD_FLOOR else STD_FLOOR
        return (x - stats.mean) / self._scale

    def transform(self, x: float) -> float:
        if self.stats.count == 0:
            return x
        return (x - self.stats.mean) / self._scale

    def inverse_transform(self, z: float) -> float:
        if self.stats.count == 0:
            return z
        return z * self._scale + self.stats.mean

    def to_state(self) -> dict:
        return {"stats": self.stats.to_state()}

    @classmethod
    def from_state(cls, state: dict) -> "OnlineScaler":
        try:
            sc = cls()
            sc.stats = RunningStats.from_state(state["stats"])
        except (KeyError, TypeError) as exc:
            raise MalformedRecord(f"bad OnlineScaler state: {exc}") from exc
        sc._scale = max(sc.stats.std(), STD_FLOOR)
        return sc
