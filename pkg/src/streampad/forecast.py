"""One-step-ahead forecasting machinery.

Three pieces compose the prediction path:

* :class:`Differencer` removes trend and seasonality by (1-B)^d (1-B^s)^D
  and inverts forecasts back to the original scale.
* :class:`SnarimaxModel` is the online forecaster: a linear regression on
  lagged values and lagged residuals (plus seasonal lags and an intercept)
  trained per observation by online gradient descent.
* :class:`WindowedArBaseline` is the batch counterpart used for comparison:
  an AR model fit by least squares on a sliding window, refreshed never, on
  a schedule, or when a drift detector fires.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .core import (
    InsufficientWindow,
    InvalidOrder,
    InvalidRate,
    InvalidSeason,
    MalformedRecord,
    NonFiniteInput,
    NotWarm,
)

__all__ = ["Differencer", "SnarimaxModel", "WindowedArBaseline"]


def _poly_mul(a: list[float], b: list[float]) -> list[float]:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


class Differencer:
    """Apply and invert (1-B)^d (1-B^s)^D differencing on a stream.

    Keeps the last ``d + D*s`` raw values; ``apply`` returns ``None`` until
    that history is full (warmup), after which ``invert(apply(x)) == x``
    exactly. ``invert`` maps a forecast on the differenced scale back to the
    original scale using the same history, and must be called before the
    corresponding ``apply`` pushes the new observation.
    """

    __slots__ = ("d", "D", "s", "depth", "_tail", "_history")

    def __init__(self, d: int = 0, D: int = 0, s: int = 1) -> None:
        for name, v in (("d", d), ("D", D)):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InvalidOrder(f"{name} must be a non-negative integer, got {v!r}")
        if not isinstance(s, int) or isinstance(s, bool) or s < 1:
            raise InvalidSeason(f"s must be an integer >= 1, got {s!r}")
        if D > 0 and s < 2:
            raise InvalidSeason(f"seasonal differencing requires s >= 2, got s={s}")
        self.d = d
        self.D = D
        self.s = s
        coeffs = [1.0]
        for _ in range(d):
            coeffs = _poly_mul(coeffs, [1.0, -1.0])
        for _ in range(D):
            coeffs = _poly_mul(coeffs, [1.0] + [0.0] * (s - 1) + [-1.0])
        self.depth = len(coeffs) - 1
        # Coefficient of lag j is _tail[j-1]; lag 0 coefficient is always 1.
        self._tail = coeffs[1:]
        self._history: deque[float] = deque(maxlen=self.depth if self.depth else 1)

    @property
    def ready(self) -> bool:
        return self.depth == 0 or len(self._history) == self.depth

    def _lag_sum(self) -> float:
        acc = 0.0
        for c, x in zip(self._tail, reversed(self._history)):
            acc += c * x
        return acc

    def apply(self, x: float) -> float | None:
        """Difference ``x``; ``None`` while the history is still filling."""
        if not math.isfinite(x):
            raise NonFiniteInput(f"cannot difference {x!r}")
        if self.depth == 0:
            return x
        if len(self._history) < self.depth:
            self._history.append(x)
            return None
        y = x + self._lag_sum()
        self._history.append(x)
        return y

    def invert(self, y_hat: float) -> float:
        """Map a differenced-scale forecast back to the original scale."""
        if not self.ready:
            raise NotWarm(
                f"differencing history holds {len(self._history)} of {self.depth} values"
            )
        if self.depth == 0:
            return y_hat
        return y_hat - self._lag_sum()

    def to_state(self) -> dict:
        return {"d": self.d, "D": self.D, "s": self.s, "history": list(self._history)}

    @classmethod
    def from_state(cls, state: dict) -> "Differencer":
        try:
            df = cls(d=state["d"], D=state["D"], s=state["s"])
            hist = [float(v) for v in state["history"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad Differencer state: {exc}") from exc
        if len(hist) > df.depth:
            raise MalformedRecord("differencing history longer than depth")
        df._history.extend(hist)
        return df


class _Ring:
    """Fixed-capacity lag buffer; lags beyond what was seen read as 0."""

    __slots__ = ("cap", "_buf", "_n", "_i")

    def __init__(self, cap: int) -> None:
        self.cap = cap
        self._buf = [0.0] * (cap if cap else 1)
        self._n = 0
        self._i = 0

    def push(self, x: float) -> None:
        if self.cap == 0:
            return
        self._buf[self._i] = x
        self._i = (self._i + 1) % self.cap
        if self._n < self.cap:
            self._n += 1

    def lag(self, k: int) -> float:
        # k >= 1; entries not yet written contribute 0 (standardized mean).
        if k > self._n:
            return 0.0
        return self._buf[(self._i - k) % self.cap]

    def to_list(self) -> list[float]:
        return [self.lag(k) for k in range(self._n, 0, -1)]

    def load(self, values: list[float]) -> None:
        if len(values) > self.cap:
            raise MalformedRecord("lag buffer longer than its capacity")
        self._buf = [0.0] * (self.cap if self.cap else 1)
        self._n = 0
        self._i = 0
        for v in values:
            self.push(v)


class SnarimaxModel:
    """Linear seasonal ARIMA-style regressor trained by online gradient descent.

    The one-step forecast is a dot product over lagged targets, lagged
    residuals, their seasonal counterparts at multiples of ``s``, and an
    intercept:

        y_hat = sum_i w_i * f_i,
        f = [y_{t-1}..y_{t-p}, e_{t-1}..e_{t-q},
             y_{t-s}..y_{t-Ps}, e_{t-s}..e_{t-Qs}, 1]

    Learning minimizes the squared error L = (y - y_hat)^2 one observation
    at a time: w <- w + 2 * lr * e * f (no 1/2 convention; the learning rate
    absorbs constant factors). Lags not yet observed contribute 0, which on
    standardized data is the mean, so no separate burn-in path exists.

    An update whose result would be non-finite is skipped entirely (counted
    in ``skipped_updates``) while the buffers still advance: one bad point
    must not destroy the model.
    """

    __slots__ = (
        "p",
        "q",
        "P",
        "Q",
        "s",
        "learning_rate",
        "weights",
        "skipped_updates",
        "_y",
        "_e",
        "_y_lags",
        "_e_lags",
        "_feat_cache",
    )

    def __init__(
        self,
        p: int = 2,
        q: int = 2,
        P: int = 2,
        Q: int = 2,
        s: int = 52,
        learning_rate: float = 0.001,
    ) -> None:
        for name, v in (("p", p), ("q", q), ("P", P), ("Q", Q)):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InvalidOrder(f"{name} must be a non-negative integer, got {v!r}")
        if not isinstance(s, int) or isinstance(s, bool) or s < 1:
            raise InvalidSeason(f"s must be an integer >= 1, got {s!r}")
        if (P > 0 or Q > 0) and s < 2:
            raise InvalidSeason(f"seasonal orders require s >= 2, got s={s}")
        # lr = 0 is allowed here (frozen inference); the detector config is
        # stricter and requires a strictly positive rate.
        if not (isinstance(learning_rate, (int, float)) and math.isfinite(learning_rate) and learning_rate >= 0):
            raise InvalidRate(f"learning_rate must be finite and >= 0, got {learning_rate!r}")
        self.p = p
        self.q = q
        self.P = P
        self.Q = Q
        self.s = s
        self.learning_rate = learning_rate
        self.weights = [0.0] * (p + q + P + Q + 1)
        self.skipped_updates = 0
        self._y = _Ring(max(p, P * s))
        self._e = _Ring(max(q, Q * s))
        # Feature layout: y lags, then e lags, matching the weights order
        # (intercept last, handled separately in the dot products).
        self._y_lags = tuple(range(1, p + 1)) + tuple(s * k for k in range(1, P + 1))
        self._e_lags = tuple(range(1, q + 1)) + tuple(s * k for k in range(1, Q + 1))
        self._feat_cache: list[float] | None = None

    def _features(self) -> list[float]:
        # Hottest loop in the pipeline: reads the ring internals directly,
        # one function call instead of one per lag.
        y = self._y
        yb, yn, yi, yc = y._buf, y._n, y._i, y.cap
        e = self._e
        eb, en, ei, ec = e._buf, e._n, e._i, e.cap
        f = [yb[(yi - k) % yc] if k <= yn else 0.0 for k in self._y_lags[: self.p]]
        for k in self._e_lags[: self.q]:
            f.append(eb[(ei - k) % ec] if k <= en else 0.0)
        for k in self._y_lags[self.p :]:
            f.append(yb[(yi - k) % yc] if k <= yn else 0.0)
        for k in self._e_lags[self.q :]:
            f.append(eb[(ei - k) % ec] if k <= en else 0.0)
        return f

    def predict(self) -> float:
        """One-step forecast from current weights and buffers."""
        w = self.weights
        f = self._features()
        # learn() on the same buffer state reuses this vector
        self._feat_cache = f
        acc = w[-1]
        for i, fi in enumerate(f):
            acc += w[i] * fi
        return acc

    def learn(self, y: float, update_weights: bool = True) -> float:
        """Observe ``y``, update weights by one gradient step, return residual.

        With ``update_weights=False`` the residual is still computed and the
        lag buffers advance, but the weights stay frozen.
        """
        if not math.isfinite(y):
            raise NonFiniteInput(f"cannot learn from {y!r}")
        f = self._feat_cache
        if f is None:
            f = self._features()
        w = self.weights
        y_hat = w[-1]
        for i, fi in enumerate(f):
            y_hat += w[i] * fi
        e = y - y_hat
        if update_weights:
            committed = False
            if math.isfinite(e):
                g = 2.0 * self.learning_rate * e
                new_w = [w[i] + g * fi for i, fi in enumerate(f)]
                new_w.append(w[-1] + g)
                if all(map(math.isfinite, new_w)):
                    self.weights = new_w
                    committed = True
            if not committed:
                self.skipped_updates += 1
        self._y.push(y)
        # A non-finite residual would poison every later forecast; store the
        # standardized mean instead.
        self._e.push(e if math.isfinite(e) else 0.0)
        self._feat_cache = None
        return e

    def to_state(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "P": self.P,
            "Q": self.Q,
            "s": self.s,
            "learning_rate": self.learning_rate,
            "weights": list(self.weights),
            "skipped_updates": self.skipped_updates,
            "y_buffer": self._y.to_list(),
            "e_buffer": self._e.to_list(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "SnarimaxModel":
        try:
            m = cls(
                p=state["p"],
                q=state["q"],
                P=state["P"],
                Q=state["Q"],
                s=state["s"],
                learning_rate=state["learning_rate"],
            )
            weights = [float(v) for v in state["weights"]]
            y_buf = [float(v) for v in state["y_buffer"]]
            e_buf = [float(v) for v in state["e_buffer"]]
            m.skipped_updates = int(state["skipped_updates"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad SnarimaxModel state: {exc}") from exc
        if len(weights) != len(m.weights):
            raise MalformedRecord(
                f"weight vector has {len(weights)} entries, expected {len(m.weights)}"
            )
        m.weights = weights
        m._y.load(y_buf)
        m._e.load(e_buf)
        return m


class WindowedArBaseline:
    """Batch AR forecaster with a pluggable retraining policy.

    The input is seasonally differenced (``D`` times at season ``s``) and
    the last ``window`` differenced values are kept. A fit solves the AR
    least-squares problem on that window via normal equations, with a ridge
    jitter of 1e-8 on the lag coefficients (the intercept is unpenalized) so
    constant windows stay solvable.

    Between fits the model extrapolates from its own recursion: predictions,
    not observations, feed the forecast-side lag state, so a stale fit
    drifts away from a shifted series exactly like a batch model scored
    beyond its training window. Every (re)fit re-anchors the recursion to
    the observed history. Policies:

    * ``"none"``: fit once when ``warmup`` observations have been ingested.
    * ``"scheduled"``: additionally refit every ``period`` observations.
    * ``"dynamic"``: additionally refit whenever the supplied drift detector
      fires on the stream of absolute prediction errors.
    """

    RIDGE = 1e-8

    def __init__(
        self,
        order: int = 4,
        window: int = 800,
        D: int = 1,
        s: int = 52,
        policy: str = "none",
        period: int = 800,
        drift_detector=None,
        warmup: int | None = None,
    ) -> None:
        if not isinstance(order, int) or isinstance(order, bool) or order < 1:
            raise InvalidOrder(f"order must be an integer >= 1, got {order!r}")
        if not isinstance(window, int) or isinstance(window, bool) or window < order + 1:
            raise InvalidOrder(f"window must be an integer >= order + 1, got {window!r}")
        if policy not in ("none", "scheduled", "dynamic"):
            raise InvalidOrder(f"unknown retrain policy: {policy!r}")
        if policy == "scheduled" and (not isinstance(period, int) or period < 1):
            raise InvalidOrder(f"period must be an integer >= 1, got {period!r}")
        if policy == "dynamic" and drift_detector is None:
            from .drift import Adwin

            drift_detector = Adwin()
        self.order = order
        self.window = window
        self.policy = policy
        self.period = period
        self.drift_detector = drift_detector
        self._ingest = Differencer(0, D, s)
        self._values = deque(maxlen=window)
        self._raw = deque(maxlen=max(self._ingest.depth, 1))
        # Minimum history for a first fit: a warm differencer plus order+1
        # differenced values in the window.
        min_warm = self._ingest.depth + order + 1
        self.warmup = max(warmup if warmup is not None else min_warm, min_warm)
        self.coef_: tuple[float, tuple[float, ...]] | None = None
        self._fit_center = 0.0
        self._fit_limit = math.inf
        self.n_fits = 0
        self._steps = 0
        self._steps_at_fit = 0
        self._f_lags: deque[float] = deque(maxlen=order)
        self._f_inv = Differencer(0, D, s)

    @property
    def ready(self) -> bool:
        """True once enough history exists for meaningful predictions."""
        return self._ingest.ready

    def fit(self) -> tuple[float, tuple[float, ...]]:
        """Least-squares AR fit on the current window.

        Returns ``(intercept, lag_coefficients)``; raises
        :class:`InsufficientWindow` when the window holds fewer than
        ``order + 1`` values.
        """
        m = len(self._values)
        k = self.order
        if m < k + 1:
            raise InsufficientWindow(f"window holds {m} values, need at least {k + 1}")
        w = np.asarray(self._values, dtype=float)
        # Center before solving: keeps the normal equations well conditioned
        # (a constant window would otherwise sit at the conditioning limit).
        mu = float(w.mean())
        wc = w - mu
        rows = m - k
        X = np.empty((rows, k + 1))
        for j in range(1, k + 1):
            X[:, j - 1] = wc[k - j : m - j]
        X[:, k] = 1.0
        y = wc[k:]
        G = X.T @ X
        G[:k, :k] += self.RIDGE * np.eye(k)
        theta = np.linalg.solve(G, X.T @ y)
        coefs = tuple(float(c) for c in theta[:k])
        intercept = mu * (1.0 - sum(coefs)) + float(theta[k])
        self.coef_ = (intercept, coefs)
        # Extrapolation bound: nothing constrains the fitted recursion to be
        # stable, so cap how far forecasts may wander from the fitted window
        # (a no-op for any sane fit, prevents overflow for an explosive one).
        self._fit_center = mu
        self._fit_limit = 1e6 * max(1.0, float(w.std()))
        self.n_fits += 1
        return self.coef_

    def _anchor(self) -> None:
        # Re-seed the forecast recursion from observed history.
        self._f_lags.clear()
        tail = list(self._values)[-self.order :]
        self._f_lags.extend(tail)
        self._f_inv = Differencer(0, self._ingest.D, self._ingest.s)
        for x in self._raw:
            self._f_inv.apply(x)

    def _forecast(self) -> float:
        if self.coef_ is None:
            # Pre-fit: seasonal-naive from observed history when possible.
            if self._ingest.ready:
                return self._ingest.invert(0.0)
            return 0.0
        c0, coefs = self.coef_
        y_hat = c0
        lags = self._f_lags
        n = len(lags)
        for j, c in enumerate(coefs, start=1):
            if j <= n:
                y_hat += c * lags[n - j]
        lo = self._fit_center - self._fit_limit
        hi = self._fit_center + self._fit_limit
        if not (lo <= y_hat <= hi):
            y_hat = lo if y_hat < lo else (hi if y_hat > hi else self._fit_center)
        x_hat = self._f_inv.invert(y_hat) if self._f_inv.ready else y_hat
        # Advance the forecast recursion with its own outputs.
        self._f_lags.append(y_hat)
        self._f_inv.apply(x_hat)
        return x_hat

    def step(self, x: float) -> float:
        """Predict the incoming value, then ingest it; returns the prediction."""
        if not math.isfinite(x):
            raise NonFiniteInput(f"cannot ingest {x!r}")
        pred = self._forecast()
        y_obs = self._ingest.apply(x)
        if y_obs is not None:
            self._values.append(y_obs)
        self._raw.append(x)
        self._steps += 1
        if self.coef_ is None:
            if self._steps >= self.warmup and len(self._values) >= self.order + 1:
                self.fit()
                self._steps_at_fit = self._steps
                self._anchor()
        else:
            refit = False
            if self.policy == "scheduled":
                if (self._steps - self._steps_at_fit) % self.period == 0:
                    refit = True
            elif self.policy == "dynamic":
                refit = self.drift_detector.update(abs(pred - x))
            if refit:
                self.fit()
                self._anchor()
        return pred
