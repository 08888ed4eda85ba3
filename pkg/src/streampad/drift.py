"""Adaptive-window drift detection over a numeric stream.

Maintains an exponential histogram of the recent window: row r holds
buckets summarizing 2**r elements each (sum and internal variance), with at
most ``max_buckets`` buckets per row; overflow merges the two oldest
buckets of a row into the next. Periodically every split point between an
older and a newer sub-window is tested; when the sub-window means differ by
more than a Bernstein-style bound the oldest buckets are dropped and drift
is reported. Memory is O(max_buckets * log(width)).
"""

from __future__ import annotations

import math

from .core import InvalidRate, NonFiniteInput

__all__ = ["Adwin"]


class Adwin:
    """Adaptive windowing change detector.

    The window is cut between sub-windows W0 (older, n0 elements, mean u0)
    and W1 (newer, n1, u1) when

        |u0 - u1| >= sqrt((2/m) * var * ln(2/dp)) + (2/(3m)) * ln(2/dp)

    with m = 1/(1/n0 + 1/n1), dp = delta / width, and var the variance of
    the full window. Detection runs every ``clock`` updates once
    ``grace_period`` updates have been seen, and never shrinks the window
    below ``min_window_length``.

    Args:
        delta: Confidence parameter in (0, 1); smaller means fewer false
            alarms and slower detection.
        max_buckets: Buckets kept per histogram row before merging.
        grace_period: Updates consumed before detection is first attempted.
        min_window_length: Smallest sub-window considered for a cut, and the
            smallest width the window may shrink to.
        clock: Detection is attempted every this many updates.
    """

    def __init__(
        self,
        delta: float = 0.001,
        max_buckets: int = 10,
        grace_period: int = 10,
        min_window_length: int = 10,
        clock: int = 20,
    ) -> None:
        if not (0.0 < delta < 1.0):
            raise InvalidRate(f"delta must lie in (0, 1), got {delta!r}")
        if max_buckets < 1 or grace_period < 0 or min_window_length < 1 or clock < 1:
            raise InvalidRate("max_buckets, min_window_length, clock must be >= 1")
        self.delta = delta
        self.max_buckets = max_buckets
        self.grace_period = grace_period
        self.min_window_length = min_window_length
        self.clock = clock
        # rows[r] holds [sum, variance] pairs; index 0 is the oldest bucket
        # of the row; row r buckets summarize 2**r elements.
        self._rows: list[list[list[float]]] = [[]]
        self._width = 0
        self._total = 0.0
        self._variance = 0.0  # sum of squared deviations over the window
        self._n_updates = 0
        self.n_detections = 0

    @property
    def width(self) -> int:
        return self._width

    @property
    def mean(self) -> float:
        return self._total / self._width if self._width else 0.0

    @property
    def variance(self) -> float:
        return self._variance / self._width if self._width else 0.0

    def update(self, x: float) -> bool:
        """Insert ``x``; return True when drift was detected (window cut)."""
        if not math.isfinite(x):
            raise NonFiniteInput(f"cannot update drift detector with {x!r}")
        self._insert(x)
        self._n_updates += 1
        if (
            self._n_updates % self.clock == 0
            and self._n_updates >= self.grace_period
            and self._width >= 2 * self.min_window_length
        ):
            return self._detect_and_shrink()
        return False

    def _insert(self, x: float) -> None:
        if self._width > 0:
            mean = self._total / self._width
            self._variance += self._width * (x - mean) ** 2 / (self._width + 1)
        self._width += 1
        self._total += x
        self._rows[0].append([x, 0.0])
        self._compress()

    def _compress(self) -> None:
        r = 0
        while len(self._rows[r]) > self.max_buckets:
            if r + 1 == len(self._rows):
                self._rows.append([])
            n = 1 << r
            (s1, v1), (s2, v2) = self._rows[r][0], self._rows[r][1]
            del self._rows[r][:2]
            u1 = s1 / n
            u2 = s2 / n
            merged_var = v1 + v2 + (n / 2.0) * (u1 - u2) ** 2
            self._rows[r + 1].append([s1 + s2, merged_var])
            r += 1

    def _drop_oldest(self) -> None:
        r = len(self._rows) - 1
        while r > 0 and not self._rows[r]:
            r -= 1
        bucket = self._rows[r].pop(0)
        n1 = 1 << r
        s1, v1 = bucket
        n2 = self._width - n1
        self._width = n2
        self._total -= s1
        if n2 > 0:
            u1 = s1 / n1
            u2 = self._total / n2
            self._variance -= v1 + (n1 * n2 / (n1 + n2)) * (u1 - u2) ** 2
            if self._variance < 0.0:
                self._variance = 0.0  # guard against roundoff
        else:
            self._variance = 0.0
        while len(self._rows) > 1 and not self._rows[-1]:
            self._rows.pop()

    def _detect_and_shrink(self) -> bool:
        drift = False
        cut = True
        while cut and self._width >= 2 * self.min_window_length:
            cut = False
            width = self._width
            total = self._total
            var = self._variance / width
            dp = self.delta / width
            ln_term = math.log(2.0 / dp)
            min_len = self.min_window_length
            n0 = 0
            sum0 = 0.0
            # Oldest buckets live in the highest rows; scan old to new.
            for r in range(len(self._rows) - 1, -1, -1):
                n = 1 << r
                for bucket in self._rows[r]:
                    n0 += n
                    sum0 += bucket[0]
                    n1 = width - n0
                    if n1 <= 0:
                        break
                    if n0 < min_len or n1 < min_len:
                        continue
                    gap = sum0 / n0 - (total - sum0) / n1
                    m = 1.0 / (1.0 / n0 + 1.0 / n1)
                    eps = math.sqrt(2.0 / m * var * ln_term) + 2.0 / (3.0 * m) * ln_term
                    if abs(gap) >= eps:
                        cut = True
                        break
                if cut or n0 >= width:
                    break
            if cut:
                oldest_row = len(self._rows) - 1
                while oldest_row > 0 and not self._rows[oldest_row]:
                    oldest_row -= 1
                if self._width - (1 << oldest_row) < self.min_window_length:
                    break
                self._drop_oldest()
                drift = True
        if drift:
            self.n_detections += 1
        return drift
