"""Portable RNG, synthetic data, anomaly injection, and CSV handling."""

import json
import math

import pytest

import oracles
from streampad.core import (
    InvalidSpec,
    MissingColumn,
    NonFiniteValue,
    NonMonotoneTime,
    ParseError,
    RateOutOfRange,
)
from streampad.dataio import (
    IncrementalDrift,
    LabeledSeries,
    Rng,
    SuddenDrift,
    SynthSpec,
    _splitmix64,
    generate_synthetic,
    inject_c_to_f,
    read_csv,
    read_nab_csv,
    resample_mean,
    write_csv,
)


class TestRng:
    def test_seed_expansion_matches_published_vectors(self):
        state = 0
        outs = []
        for _ in range(3):
            state, out = _splitmix64(state)
            outs.append(out)
        assert outs == [
            0xE220A8397B1DCDAF,
            0x6E789E6AA1B965F4,
            0x06C45D188009454F,
        ]

    def test_same_seed_same_stream(self):
        a = Rng(123)
        b = Rng(123)
        assert [a.next_u64() for _ in range(20)] == [b.next_u64() for _ in range(20)]

    def test_different_seeds_diverge(self):
        assert [Rng(1).next_u64() for _ in range(4)] != [Rng(2).next_u64() for _ in range(4)]

    def test_uniform_in_unit_interval(self):
        rng = Rng(9)
        draws = [rng.uniform() for _ in range(10_000)]
        assert all(0.0 <= u < 1.0 for u in draws)
        assert sum(draws) / len(draws) == pytest.approx(0.5, abs=0.02)

    def test_normal_moments(self):
        rng = Rng(10)
        draws = [rng.normal() for _ in range(50_000)]
        mean, var = oracles.batch_mean_var(draws)
        assert mean == pytest.approx(0.0, abs=0.02)
        assert math.sqrt(var) == pytest.approx(1.0, abs=0.02)

    def test_randbelow_bounds(self):
        rng = Rng(11)
        draws = [rng.randbelow(7) for _ in range(2000)]
        assert set(draws) == set(range(7))

    def test_sample_indices_sorted_unique(self):
        rng = Rng(12)
        idx = rng.sample_indices(100, 10)
        assert len(idx) == 10
        assert len(set(idx)) == 10
        assert idx == sorted(idx)
        assert all(0 <= i < 100 for i in idx)


class TestGenerateSynthetic:
    def test_constant_level(self):
        spec = SynthSpec(n=50, level=5.0, seed=0)
        series = generate_synthetic(spec)
        assert series.values() == [5.0] * 50

    def test_seasonal_component(self):
        spec = SynthSpec(n=8, level=0.0, amplitude=2.0, period=4, seed=0)
        series = generate_synthetic(spec)
        expected = [2.0 * math.sin(2.0 * math.pi * t / 4.0) for t in range(8)]
        assert series.values() == pytest.approx(expected, abs=1e-12)

    def test_trend_component(self):
        spec = SynthSpec(n=5, level=1.0, trend=0.5, seed=0)
        series = generate_synthetic(spec)
        assert series.values() == pytest.approx([1.0, 1.5, 2.0, 2.5, 3.0])

    def test_sudden_drift_shifts_mean_exactly(self):
        spec = SynthSpec(n=1000, level=0.0, drift=SuddenDrift(at=500, delta=10.0), seed=0)
        series = generate_synthetic(spec)
        v = series.values()
        before = sum(v[:500]) / 500
        after = sum(v[600:]) / 400
        assert after - before == pytest.approx(10.0, abs=1e-12)

    def test_incremental_drift_ramps_to_total_delta(self):
        spec = SynthSpec(
            n=100, level=0.0, drift=IncrementalDrift(start=20, end=60, total_delta=8.0), seed=0
        )
        v = generate_synthetic(spec).values()
        assert v[19] == 0.0
        assert v[60] == pytest.approx(8.0)
        assert v[99] == pytest.approx(8.0)
        assert v[40] == pytest.approx(4.0)

    def test_anomaly_count_is_exact(self):
        spec = SynthSpec(n=1000, level=0.0, noise_std=1.0, anomaly_rate=0.01, seed=3)
        series = generate_synthetic(spec)
        assert sum(series.labels()) == 10

    def test_anomalies_visible_as_spikes(self):
        spec = SynthSpec(
            n=400, level=0.0, noise_std=1.0, anomaly_rate=0.02,
            anomaly_magnitude=8.0, seed=4,
        )
        series = generate_synthetic(spec)
        flagged = [abs(o.value) for o in series.observations if o.label]
        clean = [abs(o.value) for o in series.observations if not o.label]
        assert min(flagged) > max(clean)

    def test_fixed_seed_bit_identical(self):
        spec = SynthSpec(n=300, level=2.0, amplitude=1.0, period=7,
                         noise_std=0.5, anomaly_rate=0.02, seed=77)
        a = generate_synthetic(spec)
        b = generate_synthetic(spec)
        assert a.values() == b.values()
        assert a.labels() == b.labels()

    def test_invalid_spec_rejected(self):
        with pytest.raises(InvalidSpec):
            generate_synthetic(SynthSpec(n=0))
        with pytest.raises(InvalidSpec):
            generate_synthetic(SynthSpec(n=10, anomaly_rate=1.5))
        with pytest.raises(InvalidSpec):
            generate_synthetic(SynthSpec(n=10, noise_std=-1.0))


class TestInjectCToF:
    def _series(self, values):
        from streampad.core import Observation

        return LabeledSeries(
            observations=[Observation(i, float(v)) for i, v in enumerate(values)],
            name="t",
        )

    def test_conversion_formula(self):
        series = self._series([0.0] * 50 + [100.0] * 50)
        out = inject_c_to_f(series, rate=0.1, seed=0)
        for orig, new in zip(series.observations, out.observations):
            if new.label:
                expected = orig.value * 9.0 / 5.0 + 32.0
                assert new.value == expected
            else:
                assert new.value == orig.value

    def test_fixed_point_still_labeled(self):
        series = self._series([-40.0] * 100)
        out = inject_c_to_f(series, rate=0.05, seed=1)
        flagged = [o for o in out.observations if o.label]
        assert len(flagged) == 5
        for o in flagged:
            assert o.value == -40.0

    def test_exact_count_and_reproducibility(self):
        series = self._series(range(1000))
        a = inject_c_to_f(series, rate=0.01, seed=9)
        b = inject_c_to_f(series, rate=0.01, seed=9)
        assert sum(o.label for o in a.observations) == 10
        assert [o.value for o in a.observations] == [o.value for o in b.observations]

    def test_rate_bounds(self):
        series = self._series(range(10))
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(RateOutOfRange):
                inject_c_to_f(series, rate=bad, seed=0)


class TestReadWriteCsv:
    def test_well_formed_file(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("time,value\n0,1.5\n1,2.5\n2,3.5\n")
        series = read_csv(path)
        assert len(series.observations) == 3
        assert series.values() == [1.5, 2.5, 3.5]
        assert series.labels() == [False, False, False]

    def test_labels_parsed(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("time,value,label\n0,1.0,0\n1,2.0,1\n2,3.0,true\n")
        assert read_csv(path).labels() == [False, True, True]

    def test_nan_value_rejected_with_row_number(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("time,value\n0,1.0\n1,NaN\n")
        with pytest.raises(NonFiniteValue, match="row 3"):
            read_csv(path)

    def test_unparseable_value_names_row(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("time,value\n0,1.0\n1,abc\n")
        with pytest.raises(ParseError, match="row 3"):
            read_csv(path)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("when,reading\n0,1.0\n")
        with pytest.raises(MissingColumn):
            read_csv(path)

    def test_non_monotone_time_rejected(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("time,value\n5,1.0\n3,2.0\n")
        with pytest.raises(NonMonotoneTime):
            read_csv(path)

    def test_round_trip_preserves_values_exactly(self, tmp_path):
        spec = SynthSpec(n=64, level=3.3, amplitude=1.7, period=9,
                         noise_std=0.4, anomaly_rate=0.05, seed=6)
        series = generate_synthetic(spec)
        path = tmp_path / "rt.csv"
        write_csv(series, str(path))
        back = read_csv(path)
        assert back.values() == series.values()
        assert back.labels() == series.labels()


class TestNabFormat:
    CSV = (
        "timestamp,value\n"
        "2014-01-01 00:00:00,1.0\n"
        "2014-01-01 01:00:00,2.0\n"
        "2014-01-01 02:00:00,9.0\n"
        "2014-01-01 03:00:00,2.5\n"
        "2014-01-01 04:00:00,1.5\n"
    )

    def test_labels_inside_windows(self, tmp_path):
        path = tmp_path / "nab.csv"
        path.write_text(self.CSV)
        windows = [["2014-01-01 01:30:00", "2014-01-01 03:30:00"]]
        series = read_nab_csv(path, windows)
        assert series.labels() == [False, False, True, True, False]

    def test_window_bounds_inclusive(self, tmp_path):
        path = tmp_path / "nab.csv"
        path.write_text(self.CSV)
        windows = [["2014-01-01 02:00:00", "2014-01-01 02:00:00"]]
        assert read_nab_csv(path, windows).labels() == [False, False, True, False, False]

    def test_windows_from_json_mapping(self, tmp_path):
        path = tmp_path / "nab.csv"
        path.write_text(self.CSV)
        labels_path = tmp_path / "labels.json"
        labels_path.write_text(json.dumps({
            str(path): [["2014-01-01 00:00:00", "2014-01-01 00:30:00"]],
        }))
        series = read_nab_csv(path, str(labels_path))
        assert series.labels() == [True, False, False, False, False]

    def test_missing_mapping_entry_rejected(self, tmp_path):
        path = tmp_path / "nab.csv"
        path.write_text(self.CSV)
        labels_path = tmp_path / "labels.json"
        labels_path.write_text(json.dumps({"unrelated.csv": []}))
        with pytest.raises(MissingColumn):
            read_nab_csv(path, str(labels_path))


class TestResample:
    def test_means_of_consecutive_blocks(self):
        from streampad.core import Observation

        series = LabeledSeries(
            observations=[Observation(i, float(v)) for i, v in enumerate([1, 2, 3, 4, 5])],
            name="r",
        )
        out = resample_mean(series, 2)
        assert out.values() == [1.5, 3.5]

    def test_block_label_is_any(self):
        from streampad.core import Observation

        series = LabeledSeries(
            observations=[
                Observation(0, 1.0, False),
                Observation(1, 2.0, True),
                Observation(2, 3.0, False),
                Observation(3, 4.0, False),
            ],
            name="r",
        )
        out = resample_mean(series, 2)
        assert out.labels() == [True, False]
