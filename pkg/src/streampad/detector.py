"""The streaming anomaly detector: forecast, compare, threshold, score.

Per observation the pipeline standardizes the value, differences it, asks
the online model for a one-step forecast, maps that forecast back to the
original scale, and turns the absolute prediction error into a score

    score = min(error / threshold, 1)

so 1.0 means "at or beyond the threshold". The model and the error
statistics then learn from the point, making the whole detector a single
O(1)-per-observation online learner.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from .core import (
    MEAN_SIGMA,
    DetectorConfig,
    MalformedRecord,
    NonFiniteInput,
    NonMonotoneTick,
    Observation,
    ScoredPoint,
    ThresholdRule,
    validate_config,
)
from .forecast import Differencer, SnarimaxModel
from .stats import OnlineScaler, RunningStats
from .thresholds import TAU_FLOOR, tau_from_stats

__all__ = ["PadDetector"]

_STATE_SCHEMA = "streampad/state"
_STATE_VERSION = 1


class PadDetector(BaseEstimator):
    """Predictive anomaly detector over a univariate stream.

    Follows the familiar estimator conventions: constructor arguments are
    stored verbatim, ``fit``/``partial_fit`` consume data and return
    ``self``, and fitted state lives in trailing-underscore attributes. The
    native interface is :meth:`score_learn_one`, which scores and learns
    from a single observation; the batch methods wrap it.

    Args:
        p, d, q: Non-seasonal AR, differencing, and MA orders.
        P, D, Q: Seasonal orders at season ``s``.
        s: Season length.
        learning_rate: Online gradient descent step size.
        rule: Threshold strategy: ``"mean-sigma"``, ``"gaussian"``,
            ``"gumbel"``, or a prebuilt :class:`ThresholdRule`.
        c: Sensitivity multiplier for the mean-sigma rule.
        alpha: Significance level for the quantile rules.
        gumbel_n: Sample count for the Gumbel rule; ``None`` tracks the
            number of points scored so far.
        warmup: Observations consumed before scores are emitted; ``None``
            selects ``d + D*s + max(p, q, P*s, Q*s)``.
        learn_on_anomaly: When ``False``, a point scoring exactly 1 updates
            neither the model weights nor the error statistics.
        error_decay: Exponential decay of the error statistics, or ``None``
            for exact global statistics.
    """

    def __init__(
        self,
        p: int = 2,
        d: int = 1,
        q: int = 2,
        P: int = 2,
        D: int = 0,
        Q: int = 2,
        s: int = 52,
        learning_rate: float = 0.001,
        rule: str | ThresholdRule = "mean-sigma",
        c: float = 3.0,
        alpha: float = 0.05,
        gumbel_n: int | None = None,
        warmup: int | None = None,
        learn_on_anomaly: bool = True,
        error_decay: float | None = 0.01,
    ) -> None:
        self.p = p
        self.d = d
        self.q = q
        self.P = P
        self.D = D
        self.Q = Q
        self.s = s
        self.learning_rate = learning_rate
        self.rule = rule
        self.c = c
        self.alpha = alpha
        self.gumbel_n = gumbel_n
        self.warmup = warmup
        self.learn_on_anomaly = learn_on_anomaly
        self.error_decay = error_decay

    # -- state management -------------------------------------------------

    def _build_config(self) -> DetectorConfig:
        if isinstance(self.rule, ThresholdRule):
            rule = self.rule
        else:
            rule = ThresholdRule(kind=self.rule, c=self.c, alpha=self.alpha, n=self.gumbel_n)
        return validate_config(
            DetectorConfig(
                p=self.p,
                d=self.d,
                q=self.q,
                P=self.P,
                D=self.D,
                Q=self.Q,
                s=self.s,
                learning_rate=self.learning_rate,
                threshold_rule=rule,
                warmup=self.warmup,
                learn_on_anomaly=self.learn_on_anomaly,
                error_decay=self.error_decay,
            )
        )

    def _reset_state(self) -> None:
        cfg = self._build_config()
        self.config_ = cfg
        self.scaler_ = OnlineScaler()
        self.differencer_ = Differencer(cfg.d, cfg.D, cfg.s)
        self.model_ = SnarimaxModel(
            p=cfg.p, q=cfg.q, P=cfg.P, Q=cfg.Q, s=cfg.s, learning_rate=cfg.learning_rate
        )
        self.error_stats_ = RunningStats(decay=cfg.error_decay)
        self.last_tick_: int | None = None
        self.n_seen_ = 0
        self.points_scored_ = 0
        # hot-path caches; plain derived values, never serialized
        self._warmup_ = cfg.effective_warmup
        self._rule_ = cfg.threshold_rule
        rule = cfg.threshold_rule
        self._ms_c_ = rule.c if rule.kind == MEAN_SIGMA else None

    def _ensure_state(self) -> None:
        if not hasattr(self, "config_"):
            self._reset_state()

    # -- streaming interface ----------------------------------------------

    def score_learn_one(self, obs: Observation) -> ScoredPoint | None:
        """Score one observation and learn from it.

        Returns ``None`` while the detector is still warming up, afterwards
        exactly one :class:`ScoredPoint` per input. Ticks must strictly
        increase; values must be finite.
        """
        self._ensure_state()
        return self._step(obs.t, obs.value)

    def _step(self, t: int, x: float) -> ScoredPoint | None:
        if not math.isfinite(x):
            raise NonFiniteInput(f"observation value {x!r} at tick {t}")
        last = self.last_tick_
        if last is not None and t <= last:
            raise NonMonotoneTick(f"tick {t} does not increase on previous tick {last}")
        self.last_tick_ = t

        cfg = self.config_
        scaler = self.scaler_
        differ = self.differencer_
        model = self.model_

        z = scaler.learn_transform(x)
        point = None
        eps = None
        if differ.ready:
            z_hat = differ.invert(model.predict())
            x_hat = scaler.inverse_transform(z_hat)
            eps = abs(x_hat - x)
            if self.n_seen_ >= self._warmup_:
                c = self._ms_c_
                if c is not None:
                    # inlined tau_mean_sigma, the default rule
                    stats = self.error_stats_
                    tau = max(stats.mean + c * stats.std(), TAU_FLOOR)
                else:
                    tau = tau_from_stats(self._rule_, self.error_stats_, self.points_scored_)
                score = eps / tau
                point = ScoredPoint(t, x, x_hat, eps, tau, score if score < 1.0 else 1.0)

        freeze = (
            not cfg.learn_on_anomaly and point is not None and point.score >= 1.0
        )
        if eps is not None and not freeze and math.isfinite(eps):
            self.error_stats_.update(eps)
        y_diff = differ.apply(z)
        if y_diff is not None:
            model.learn(y_diff, update_weights=not freeze)

        self.n_seen_ += 1
        if point is not None:
            self.points_scored_ += 1
        return point

    # -- batch facade -------------------------------------------------------

    def _iter_points(self, X):
        if len(X) > 0 and isinstance(X[0], Observation):
            for obs in X:
                yield obs.t, obs.value
            return
        values = np.asarray(X, dtype=float)
        if values.ndim == 2 and values.shape[1] == 1:
            values = values[:, 0]
        if values.ndim != 1:
            raise ValueError("X must be one-dimensional (a single series)")
        t = self.last_tick_ + 1 if self.last_tick_ is not None else 0
        for v in values:
            yield t, float(v)
            t += 1

    def fit(self, X, y=None) -> "PadDetector":
        """Consume the stream in ``X`` from a fresh state; return ``self``."""
        self._reset_state()
        for t, v in self._iter_points(X):
            self._step(t, v)
        return self

    def partial_fit(self, X, y=None) -> "PadDetector":
        """Consume more observations without resetting accumulated state."""
        self._ensure_state()
        for t, v in self._iter_points(X):
            self._step(t, v)
        return self

    def fit_score(self, X) -> np.ndarray:
        """Fit from scratch and return one score per input (NaN in warmup)."""
        self._reset_state()
        out = np.full(len(X), np.nan)
        i = 0
        for t, v in self._iter_points(X):
            point = self._step(t, v)
            if point is not None:
                out[i] = point.score
            i += 1
        return out

    def fit_predict(self, X) -> np.ndarray:
        """Fit from scratch and return 0/1 anomaly flags (warmup points are 0)."""
        scores = self.fit_score(X)
        return (scores >= 1.0).astype(int)

    # -- state snapshot -------------------------------------------------------

    def snapshot(self) -> dict:
        """Serializable state record; restoring it resumes scoring bit-exactly."""
        self._ensure_state()
        rule = self.config_.threshold_rule
        return {
            "schema": _STATE_SCHEMA,
            "version": _STATE_VERSION,
            "params": {
                "p": self.config_.p,
                "d": self.config_.d,
                "q": self.config_.q,
                "P": self.config_.P,
                "D": self.config_.D,
                "Q": self.config_.Q,
                "s": self.config_.s,
                "learning_rate": self.config_.learning_rate,
                "rule": rule.kind,
                "c": rule.c,
                "alpha": rule.alpha,
                "gumbel_n": rule.n,
                "warmup": self.config_.warmup,
                "learn_on_anomaly": self.config_.learn_on_anomaly,
                "error_decay": self.config_.error_decay,
            },
            "state": {
                "last_tick": self.last_tick_,
                "n_seen": self.n_seen_,
                "points_scored": self.points_scored_,
                "scaler": self.scaler_.to_state(),
                "differencer": self.differencer_.to_state(),
                "model": self.model_.to_state(),
                "error_stats": self.error_stats_.to_state(),
            },
        }

    @classmethod
    def restore(cls, record: dict) -> "PadDetector":
        """Rebuild a detector from a :meth:`snapshot` record."""
        if not isinstance(record, dict):
            raise MalformedRecord("state record must be a mapping")
        if record.get("schema") != _STATE_SCHEMA:
            raise MalformedRecord(f"unexpected schema {record.get('schema')!r}")
        if record.get("version") != _STATE_VERSION:
            raise MalformedRecord(f"unsupported state version {record.get('version')!r}")
        try:
            params = dict(record["params"])
            state = record["state"]
            det = cls(**params)
            det._reset_state()
            det.last_tick_ = state["last_tick"]
            det.n_seen_ = int(state["n_seen"])
            det.points_scored_ = int(state["points_scored"])
            det.scaler_ = OnlineScaler.from_state(state["scaler"])
            det.differencer_ = Differencer.from_state(state["differencer"])
            det.model_ = SnarimaxModel.from_state(state["model"])
            det.error_stats_ = RunningStats.from_state(state["error_stats"])
        except MalformedRecord:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad state record: {exc}") from exc
        return det
