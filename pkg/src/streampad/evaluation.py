"""Metrics and the benchmark harness.

Forecast quality is summarized by MAE and MSE; detection quality by the
best F1 over a full threshold sweep and by ROC AUC. The benchmark runner
streams one labeled dataset through a set of contenders (the online
detector plus batch baselines under three retraining policies), excluding a
shared burn-in from every metric so the comparison is symmetric, and times
each full pass.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .core import (
    DegenerateLabels,
    EmptyInput,
    InvalidSpec,
    LengthMismatch,
    NonFiniteInput,
    NonMonotoneTick,
    NoPositives,
    Observation,
    ScoredPoint,
    ThresholdRule,
)
from .detector import PadDetector
from .drift import Adwin
from .forecast import WindowedArBaseline
from .stats import RunningStats
from .thresholds import tau_from_stats

__all__ = [
    "MetricsReport",
    "mae_mse",
    "f1_sweep",
    "auc_roc",
    "BaselineDetector",
    "CONTENDERS",
    "run_benchmark",
]


@dataclass(slots=True)
class MetricsReport:
    """Per-contender benchmark result row."""

    contender: str
    mae: float
    mse: float
    f1: float
    best_f1_threshold: float
    auc_roc: float
    mean_time_ms: float | None
    std_time_ms: float | None
    n_points: int
    n_anomalies: int

    def to_dict(self) -> dict:
        return {
            "contender": self.contender,
            "mae": self.mae,
            "mse": self.mse,
            "f1": self.f1,
            "best_f1_threshold": self.best_f1_threshold,
            "auc_roc": self.auc_roc,
            "mean_time_ms": self.mean_time_ms,
            "std_time_ms": self.std_time_ms,
            "n_points": self.n_points,
            "n_anomalies": self.n_anomalies,
        }


def mae_mse(preds, truths) -> tuple[float, float]:
    """Mean absolute error and mean squared error of paired sequences."""
    if len(preds) != len(truths):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(truths)} truths")
    n = len(preds)
    if n == 0:
        raise EmptyInput("cannot compute metrics over zero points")
    abs_sum = 0.0
    sq_sum = 0.0
    for p, t in zip(preds, truths):
        diff = p - t
        abs_sum += abs(diff)
        sq_sum += diff * diff
    return abs_sum / n, sq_sum / n


def f1_sweep(scores, labels) -> tuple[float, float]:
    """Best F1 over every distinct score used as threshold.

    Predicts positive where ``score >= threshold``. Returns the maximum F1
    and the smallest threshold achieving it. F1 is defined as 0 when
    precision + recall is 0.
    """
    if len(scores) != len(labels):
        raise LengthMismatch(f"{len(scores)} scores vs {len(labels)} labels")
    n_pos = sum(1 for l in labels if l)
    if n_pos == 0:
        raise NoPositives("label sequence contains no positives")
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    best_f1 = -1.0
    best_thr = 0.0
    tp = 0
    n_pred = 0
    i = 0
    n = len(order)
    while i < n:
        thr = scores[order[i]]
        # absorb the whole tie group at this threshold
        while i < n and scores[order[i]] == thr:
            n_pred += 1
            if labels[order[i]]:
                tp += 1
            i += 1
        precision = tp / n_pred
        recall = tp / n_pos
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0.0 else 0.0
        # scan runs from high to low thresholds, so >= keeps the smallest
        # threshold among those achieving the maximum
        if f1 >= best_f1:
            best_f1 = f1
            best_thr = thr
    return best_f1, best_thr


def auc_roc(scores, labels) -> float:
    """Area under the ROC curve by rank summation (ties averaged).

    Equals the Mann-Whitney statistic P(score_pos > score_neg) plus half
    the tie probability. Needs at least one positive and one negative.
    """
    if len(scores) != len(labels):
        raise LengthMismatch(f"{len(scores)} scores vs {len(labels)} labels")
    n = len(scores)
    n_pos = sum(1 for l in labels if l)
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"need both classes, got {n_pos} positives of {n}")
    order = sorted(range(n), key=lambda i: scores[i])
    rank_sum_pos = 0.0
    i = 0
    while i < n:
        j = i
        while j < n and scores[order[j]] == scores[order[i]]:
            j += 1
        # ranks are 1-based; the tie group [i, j) shares the average rank
        avg_rank = (i + 1 + j) / 2.0
        for k in range(i, j):
            if labels[order[k]]:
                rank_sum_pos += avg_rank
        i = j
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


class BaselineDetector:
    """Scores a stream with a windowed batch AR forecaster.

    Wraps :class:`WindowedArBaseline` in the same error-statistics plus
    threshold scoring used by the online detector, so benchmark rows are
    directly comparable. Emits ``None`` during the shared burn-in.
    """

    def __init__(
        self,
        policy: str,
        warmup: int,
        s: int = 52,
        order: int = 4,
        window: int = 800,
        D: int = 1,
        period: int = 800,
        adwin_delta: float = 0.001,
        rule: ThresholdRule | None = None,
        error_decay: float | None = 0.01,
    ) -> None:
        detector = Adwin(delta=adwin_delta) if policy == "dynamic" else None
        self.baseline = WindowedArBaseline(
            order=order,
            window=window,
            D=D,
            s=s,
            policy=policy,
            period=period,
            drift_detector=detector,
            warmup=warmup,
        )
        self.warmup = max(warmup, self.baseline.warmup)
        self.rule = rule if rule is not None else ThresholdRule()
        self.error_stats_ = RunningStats(decay=error_decay)
        self.last_tick_: int | None = None
        self.n_seen_ = 0
        self.points_scored_ = 0

    def score_learn_one(self, obs: Observation) -> ScoredPoint | None:
        x = obs.value
        if not math.isfinite(x):
            raise NonFiniteInput(f"observation value {x!r} at tick {obs.t}")
        if self.last_tick_ is not None and obs.t <= self.last_tick_:
            raise NonMonotoneTick(
                f"tick {obs.t} does not increase on previous tick {self.last_tick_}"
            )
        self.last_tick_ = obs.t
        ready = self.baseline.ready
        x_hat = self.baseline.step(x)
        point = None
        if ready:
            eps = abs(x_hat - x)
            if self.n_seen_ >= self.warmup:
                tau = tau_from_stats(self.rule, self.error_stats_, self.points_scored_)
                score = eps / tau
                point = ScoredPoint(obs.t, x, x_hat, eps, tau, score if score < 1.0 else 1.0)
            if math.isfinite(eps):
                self.error_stats_.update(eps)
        self.n_seen_ += 1
        if point is not None:
            self.points_scored_ += 1
        return point


CONTENDERS = ("oml-ad", "baseline-none", "baseline-scheduled", "baseline-dynamic")


def _make_contender(name: str, warmup: int, detector_params: dict, baseline_params: dict):
    if name == "oml-ad":
        return PadDetector(warmup=warmup, **detector_params)
    if name in ("baseline-none", "baseline-scheduled", "baseline-dynamic"):
        policy = name.removeprefix("baseline-")
        params = dict(baseline_params)
        params.setdefault("s", detector_params.get("s", 52))
        # seasonal differencing is meaningless for non-seasonal streams
        params.setdefault("D", 1 if params["s"] >= 2 else 0)
        rule = detector_params.get("rule")
        if isinstance(rule, str):
            rule = ThresholdRule(
                kind=rule,
                c=detector_params.get("c", 3.0),
                alpha=detector_params.get("alpha", 0.05),
                n=detector_params.get("gumbel_n"),
            )
        if rule is not None:
            params.setdefault("rule", rule)
        params.setdefault("error_decay", detector_params.get("error_decay", 0.01))
        return BaselineDetector(policy=policy, warmup=warmup, **params)
    raise InvalidSpec(f"unknown contender {name!r}")


def run_benchmark(
    series,
    contenders,
    repeats: int = 100,
    *,
    warmup: int | None = None,
    timing: bool = True,
    detector_params: dict | None = None,
    baseline_params: dict | None = None,
) -> list[MetricsReport]:
    """Stream ``series`` through each contender and report all metrics.

    Every contender sees the identical stream from a fresh state; the same
    burn-in span (``warmup``, defaulting to the online detector's natural
    warmup for its configured orders) is excluded from every metric. The
    wall-clock of each full pass is measured ``repeats`` times; metric
    values come from the first pass since the contenders are deterministic.
    With ``timing=False`` the timing fields are left empty so reports are
    byte-reproducible.
    """
    observations = series.observations
    if len(observations) == 0:
        raise EmptyInput("cannot benchmark an empty series")
    if not contenders:
        raise InvalidSpec("contender list is empty")
    if repeats < 1:
        raise InvalidSpec(f"repeats must be >= 1, got {repeats!r}")
    dp = dict(detector_params or {})
    bp = dict(baseline_params or {})
    if warmup is None:
        warmup = PadDetector(**dp)._build_config().effective_warmup

    reports = []
    for name in contenders:
        times = []
        preds: list[float] = []
        truths: list[float] = []
        scores: list[float] = []
        flags: list[bool] = []
        for rep in range(repeats):
            scorer = _make_contender(name, warmup, dp, bp)
            if rep == 0:
                t0 = time.perf_counter()
                for obs in observations:
                    point = scorer.score_learn_one(obs)
                    if point is not None:
                        preds.append(point.prediction)
                        truths.append(point.truth)
                        scores.append(point.score)
                        flags.append(bool(obs.label))
                elapsed = time.perf_counter() - t0
            else:
                t0 = time.perf_counter()
                for obs in observations:
                    scorer.score_learn_one(obs)
                elapsed = time.perf_counter() - t0
            times.append(elapsed * 1e3)

        mae, mse = mae_mse(preds, truths)
        f1, thr = f1_sweep(scores, flags)
        auc = auc_roc(scores, flags)
        if timing:
            mean_ms = sum(times) / len(times)
            var_ms = sum((t - mean_ms) ** 2 for t in times) / len(times)
            std_ms = math.sqrt(var_ms)
        else:
            mean_ms = None
            std_ms = None
        reports.append(
            MetricsReport(
                contender=name,
                mae=mae,
                mse=mse,
                f1=f1,
                best_f1_threshold=thr,
                auc_roc=auc,
                mean_time_ms=mean_ms,
                std_time_ms=std_ms,
                n_points=len(scores),
                n_anomalies=sum(flags),
            )
        )
    return reports
