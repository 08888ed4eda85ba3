"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written the slow, obvious way (bisection,
exhaustive pair counting, O(n^2) sweeps) so that agreement with the fast
production code is meaningful evidence rather than a tautology.
"""

from __future__ import annotations

import math

import mpmath

mpmath.mp.dps = 50


def half_normal_quantile_bisect(alpha: float) -> float:
    """(1 - alpha)-quantile of |N(0,1)| by bisection on a 50-digit erf.

    Solves erf(q / sqrt(2)) = 1 - alpha, the CDF of the half-normal
    distribution, to far below the comparison tolerance.
    """
    target = mpmath.mpf(1) - mpmath.mpf(repr(alpha))
    lo = mpmath.mpf(0)
    hi = mpmath.mpf(10)
    for _ in range(200):
        mid = (lo + hi) / 2
        if mpmath.erf(mid / mpmath.sqrt(2)) < target:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


def gumbel_quantile_ref(alpha: float) -> float:
    """(1 - alpha)-quantile of the standard Gumbel law at 50 digits."""
    a = mpmath.mpf(repr(alpha))
    return float(-mpmath.log(-mpmath.log(1 - a)))


def gumbel_norming_ref(n: int) -> tuple[float, float]:
    """Norming constants (a_n, b_n) for half-normal maxima at 50 digits."""
    ln2n = mpmath.log(2 * mpmath.mpf(n))
    a = mpmath.sqrt(2 * ln2n)
    b = 2 * ln2n - mpmath.log(4 * mpmath.pi * ln2n) / 2
    return float(a), float(b)


def f1_sweep_brute(scores, labels) -> tuple[float, float]:
    """Best F1 over all distinct thresholds by exhaustive recount.

    Predicts positive where score >= threshold; among thresholds achieving
    the maximum F1, returns the smallest.
    """
    n_pos = sum(1 for l in labels if l)
    best_f1 = -1.0
    best_thr = 0.0
    for thr in sorted(set(scores), reverse=True):
        tp = fp = fn = 0
        for s, l in zip(scores, labels):
            pred = s >= thr
            if pred and l:
                tp += 1
            elif pred and not l:
                fp += 1
            elif not pred and l:
                fn += 1
        precision = tp / (tp + fp) if (tp + fp) else 0.0
        recall = tp / n_pos if n_pos else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if (precision + recall) > 0
            else 0.0
        )
        if f1 >= best_f1:
            best_f1 = f1
            best_thr = thr
    return best_f1, best_thr


def auc_roc_brute(scores, labels) -> float:
    """AUC by exhaustive positive-negative pair counting (ties count 1/2)."""
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def batch_mean_var(values) -> tuple[float, float]:
    """Two-pass batch mean and population variance."""
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, var


def decayed_mean_var(values, lam: float) -> tuple[float, float]:
    """Exponentially weighted moments by direct recursion from zero."""
    mean = 0.0
    var = 0.0
    for x in values:
        diff = x - mean
        incr = lam * diff
        mean += incr
        var = (1.0 - lam) * (var + diff * incr)
    return mean, var


def half_normal_tail(x: float) -> float:
    """P(|Z| > x) for standard normal Z."""
    return math.erfc(x / math.sqrt(2.0))
