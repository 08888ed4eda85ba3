"""Adaptive-window drift detector."""

import math

import pytest

import oracles
from streampad.core import InvalidRate, NonFiniteInput
from streampad.dataio import Rng
from streampad.drift import Adwin


class TestWindowBookkeeping:
    def test_width_counts_insertions(self):
        ad = Adwin()
        for _ in range(5):
            ad.update(1.0)
        assert ad.width == 5

    def test_mean_of_constant_window(self):
        ad = Adwin()
        for _ in range(3):
            ad.update(1.0)
        assert ad.mean == pytest.approx(1.0, abs=1e-12)

    def test_mean_and_variance_match_batch_moments(self):
        rng = Rng(11)
        values = [rng.uniform() for _ in range(500)]
        ad = Adwin(delta=1e-12)  # effectively never cuts
        for v in values:
            ad.update(v)
        assert ad.width == 500
        mean, var = oracles.batch_mean_var(values)
        assert ad.mean == pytest.approx(mean, rel=1e-9)
        assert ad.variance == pytest.approx(var, rel=1e-6, abs=1e-9)

    def test_memory_stays_logarithmic(self):
        ad = Adwin(max_buckets=10)
        rng = Rng(4)
        for _ in range(100_000):
            ad.update(rng.normal())
        rows = len(ad._rows)
        assert rows <= math.ceil(math.log2(ad.width)) + 1
        assert all(len(row) <= ad.max_buckets for row in ad._rows)

    def test_rejects_non_finite(self):
        ad = Adwin()
        with pytest.raises(NonFiniteInput):
            ad.update(math.nan)

    def test_parameter_validation(self):
        with pytest.raises(InvalidRate):
            Adwin(delta=0.0)
        with pytest.raises(InvalidRate):
            Adwin(delta=1.0)
        with pytest.raises(InvalidRate):
            Adwin(max_buckets=0)


class TestDetection:
    def test_constant_stream_never_fires(self):
        ad = Adwin(delta=0.001)
        fired = any(ad.update(0.5) for _ in range(10_000))
        assert not fired
        assert ad.n_detections == 0

    def test_bernoulli_step_detected_quickly(self):
        detected_within = []
        for seed in range(10):
            rng = Rng(seed)
            ad = Adwin(delta=0.001)
            fired_at = None
            for t in range(1300):
                p = 0.2 if t < 1000 else 0.8
                x = 1.0 if rng.uniform() < p else 0.0
                if ad.update(x) and t >= 1000 and fired_at is None:
                    fired_at = t
            detected_within.append(fired_at is not None and fired_at - 1000 <= 300)
        assert sum(detected_within) >= 9

    def test_window_shrinks_on_detection(self):
        rng = Rng(7)
        ad = Adwin(delta=0.001)
        for _ in range(1000):
            ad.update(rng.normal())
        width_before = ad.width
        fired = False
        for _ in range(400):
            if ad.update(rng.normal() + 6.0):
                fired = True
                break
        assert fired
        assert ad.width < width_before

    def test_stationary_stream_rarely_fires(self):
        false_alarms = 0
        for seed in range(3):
            rng = Rng(seed + 100)
            ad = Adwin(delta=0.001)
            for _ in range(20_000):
                if ad.update(rng.normal()):
                    false_alarms += 1
        assert false_alarms <= 1

    def test_detection_counter_accumulates(self):
        rng = Rng(13)
        ad = Adwin(delta=0.01)
        for block in range(4):
            level = float(block * 10)
            for _ in range(600):
                ad.update(rng.normal() + level)
        assert ad.n_detections >= 3
