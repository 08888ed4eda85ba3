"""Config and value-object contracts."""

import math

import pytest

from streampad.core import (
    AlphaOutOfRange,
    ConfigError,
    DataError,
    DetectorConfig,
    InvalidOrder,
    InvalidRate,
    InvalidSeason,
    Observation,
    ScoredPoint,
    StreamPadError,
    ThresholdRule,
    validate_config,
)


class TestExceptionHierarchy:
    def test_config_and_data_errors_are_disjoint_branches(self):
        assert issubclass(ConfigError, StreamPadError)
        assert issubclass(DataError, StreamPadError)
        assert not issubclass(ConfigError, DataError)
        assert not issubclass(DataError, ConfigError)

    def test_specific_errors_map_to_their_branch(self):
        assert issubclass(InvalidOrder, ConfigError)
        assert issubclass(InvalidSeason, ConfigError)
        assert issubclass(InvalidRate, ConfigError)
        assert issubclass(AlphaOutOfRange, ConfigError)


class TestObservation:
    def test_fields_and_default_label(self):
        obs = Observation(3, 1.5)
        assert obs.t == 3
        assert obs.value == 1.5
        assert obs.label is None

    def test_label_carried(self):
        assert Observation(0, 0.0, True).label is True


class TestScoredPoint:
    def test_flag_iff_score_saturates(self):
        hit = ScoredPoint(0, 1.0, 3.0, 2.0, 2.0, 1.0)
        miss = ScoredPoint(1, 1.0, 1.5, 0.5, 2.0, 0.25)
        assert hit.flag is True
        assert miss.flag is False

    def test_field_access(self):
        p = ScoredPoint(7, 1.0, 2.0, 1.0, 4.0, 0.25)
        assert (p.t, p.truth, p.prediction) == (7, 1.0, 2.0)
        assert (p.error, p.threshold, p.score) == (1.0, 4.0, 0.25)


class TestThresholdRule:
    def test_default_is_mean_sigma(self):
        rule = ThresholdRule()
        assert rule.kind == "mean-sigma"
        assert rule.c == 3.0

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            ThresholdRule(kind="percentile")

    def test_alpha_bounds(self):
        with pytest.raises(AlphaOutOfRange):
            ThresholdRule(kind="gaussian", alpha=0.0)
        with pytest.raises(AlphaOutOfRange):
            ThresholdRule(kind="gaussian", alpha=1.0)

    def test_nonpositive_c_rejected(self):
        with pytest.raises(ConfigError):
            ThresholdRule(kind="mean-sigma", c=0.0)

    def test_gumbel_n_must_be_positive_or_none(self):
        ThresholdRule(kind="gumbel", alpha=0.05, n=None)
        ThresholdRule(kind="gumbel", alpha=0.05, n=100)
        with pytest.raises(ConfigError):
            ThresholdRule(kind="gumbel", alpha=0.05, n=0)


class TestDetectorConfig:
    def test_default_orders_accepted(self):
        cfg = validate_config(DetectorConfig())
        assert (cfg.p, cfg.d, cfg.q) == (2, 1, 2)
        assert (cfg.P, cfg.D, cfg.Q, cfg.s) == (2, 0, 2, 52)
        assert cfg.learning_rate == 0.001

    def test_all_zero_orders_with_unit_season_accepted(self):
        cfg = validate_config(
            DetectorConfig(p=0, d=0, q=0, P=0, D=0, Q=0, s=1, learning_rate=0.001)
        )
        assert cfg.max_lag == 0

    def test_seasonal_order_with_unit_season_rejected(self):
        with pytest.raises(InvalidSeason):
            validate_config(DetectorConfig(P=1, Q=0, D=0, s=1))

    def test_negative_order_rejected(self):
        with pytest.raises(InvalidOrder):
            validate_config(DetectorConfig(p=-1))

    def test_bad_learning_rate_rejected(self):
        for lr in (0.0, -0.1, math.nan, math.inf):
            with pytest.raises(InvalidRate):
                validate_config(DetectorConfig(learning_rate=lr))

    def test_warmup_cannot_undershoot_differencing_depth(self):
        with pytest.raises(ConfigError):
            validate_config(DetectorConfig(warmup=0))

    def test_effective_warmup_covers_depth_and_max_lag(self):
        cfg = DetectorConfig()
        assert cfg.differencing_depth == 1
        assert cfg.max_lag == 104
        assert cfg.effective_warmup == 105

    def test_explicit_warmup_respected(self):
        cfg = validate_config(DetectorConfig(warmup=500))
        assert cfg.effective_warmup == 500

    def test_error_decay_bounds(self):
        validate_config(DetectorConfig(error_decay=None))
        validate_config(DetectorConfig(error_decay=0.5))
        with pytest.raises(InvalidRate):
            validate_config(DetectorConfig(error_decay=1.5))
