"""Dataset ingestion, generation, and anomaly injection.

CSV loading assigns integer ticks 0..n-1 and keeps original timestamps as
metadata. Synthetic series are produced by a portable seeded generator
(splitmix64 expanding the seed, xorshift64* driving the stream) so fixtures
are bit-identical across platforms and languages. Anomaly injection follows
the unit-mixup recipe: selected Celsius readings are re-expressed in
Fahrenheit and labeled.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .core import (
    InvalidSpec,
    MissingColumn,
    NonFiniteValue,
    NonMonotoneTime,
    Observation,
    ParseError,
    RateOutOfRange,
)

__all__ = [
    "Rng",
    "LabeledSeries",
    "SuddenDrift",
    "IncrementalDrift",
    "SynthSpec",
    "generate_synthetic",
    "inject_c_to_f",
    "read_csv",
    "write_csv",
    "read_nab_csv",
    "resample_mean",
]

_MASK64 = (1 << 64) - 1
_TWO53_INV = 2.0 ** -53


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Rng:
    """Deterministic 64-bit generator, identical on every platform.

    The seed is expanded by splitmix64 into a nonzero starting state for an
    xorshift64* stream. Uniforms take the top 53 bits; normals come from
    Box-Muller (two uniforms per draw, nothing cached); bounded integers use
    rejection sampling so they are exactly unbiased.
    """

    __slots__ = ("_mix", "_state")

    def __init__(self, seed: int) -> None:
        self._mix = seed & _MASK64
        state = 0
        while state == 0:
            self._mix, state = _splitmix64(self._mix)
        self._state = state

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * _TWO53_INV

    def normal(self) -> float:
        """Standard normal via Box-Muller."""
        u1 = 1.0 - self.uniform()  # (0, 1]: keeps log away from zero
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n!r}")
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices drawn uniformly from range(n), sorted."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct indices from {n}")
        # partial Fisher-Yates over a virtual identity array
        swap: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.randbelow(n - i)
            out.append(swap.get(j, j))
            swap[j] = swap.get(i, i)
        return sorted(out)


@dataclass(slots=True)
class LabeledSeries:
    """A univariate series with per-point ground-truth labels.

    Ticks strictly increase; every observation carries a label (default
    False). Original timestamps, when the data had any, ride along as
    metadata so files can be round-tripped.
    """

    observations: list[Observation]
    name: str = ""
    source: str = ""
    units: str = ""
    season: int | None = None
    timestamps: list[str] | None = None

    def __len__(self) -> int:
        return len(self.observations)

    def values(self) -> list[float]:
        return [o.value for o in self.observations]

    def labels(self) -> list[bool]:
        return [bool(o.label) for o in self.observations]


@dataclass(frozen=True, slots=True)
class SuddenDrift:
    """Step change: ``delta`` is added to every point with t >= at."""

    at: int
    delta: float


@dataclass(frozen=True, slots=True)
class IncrementalDrift:
    """Linear ramp from 0 at ``start`` to ``total_delta`` at ``end``."""

    start: int
    end: int
    total_delta: float


@dataclass(frozen=True, slots=True)
class SynthSpec:
    """Recipe for a synthetic series.

    The clean signal is ``level + trend*t + amplitude*sin(2 pi t / period)``
    plus the drift term; noise is i.i.d. normal with ``noise_std``. Then
    ``floor(anomaly_rate * n)`` distinct points receive an additive spike of
    ``anomaly_magnitude * noise_std`` with random sign and are labeled. The
    seed fully determines the output.
    """

    n: int
    level: float = 0.0
    trend: float = 0.0
    amplitude: float = 0.0
    period: int = 52
    noise_std: float = 0.0
    drift: SuddenDrift | IncrementalDrift | None = None
    anomaly_rate: float = 0.0
    anomaly_magnitude: float = 8.0
    seed: int = 0


def _validate_spec(spec: SynthSpec) -> None:
    if not isinstance(spec.n, int) or spec.n < 1:
        raise InvalidSpec(f"n must be an integer >= 1, got {spec.n!r}")
    if not isinstance(spec.period, int) or spec.period < 1:
        raise InvalidSpec(f"period must be an integer >= 1, got {spec.period!r}")
    for nm in ("level", "trend", "amplitude", "noise_std", "anomaly_magnitude"):
        v = getattr(spec, nm)
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise InvalidSpec(f"{nm} must be finite, got {v!r}")
    if spec.noise_std < 0 or spec.anomaly_magnitude < 0:
        raise InvalidSpec("noise_std and anomaly_magnitude must be >= 0")
    if not 0.0 <= spec.anomaly_rate < 1.0:
        raise InvalidSpec(f"anomaly_rate must lie in [0, 1), got {spec.anomaly_rate!r}")
    drift = spec.drift
    if isinstance(drift, SuddenDrift):
        if not 0 <= drift.at < spec.n:
            raise InvalidSpec(f"drift index {drift.at} outside [0, {spec.n})")
    elif isinstance(drift, IncrementalDrift):
        if not (0 <= drift.start < drift.end < spec.n):
            raise InvalidSpec(
                f"incremental drift needs 0 <= start < end < n, got [{drift.start}, {drift.end})"
            )
    elif drift is not None:
        raise InvalidSpec(f"unknown drift kind {drift!r}")


def generate_synthetic(spec: SynthSpec) -> LabeledSeries:
    """Produce the series described by ``spec``; bit-identical per seed."""
    _validate_spec(spec)
    rng = Rng(spec.seed)
    two_pi_over_s = 2.0 * math.pi / spec.period
    drift = spec.drift
    values = []
    for t in range(spec.n):
        x = spec.level + spec.trend * t + spec.amplitude * math.sin(two_pi_over_s * t)
        if isinstance(drift, SuddenDrift):
            if t >= drift.at:
                x += drift.delta
        elif isinstance(drift, IncrementalDrift):
            if t >= drift.end:
                x += drift.total_delta
            elif t > drift.start:
                x += drift.total_delta * (t - drift.start) / (drift.end - drift.start)
        if spec.noise_std > 0.0:
            x += rng.normal() * spec.noise_std
        values.append(x)

    n_anom = int(spec.anomaly_rate * spec.n)
    anomalous = set()
    if n_anom > 0:
        indices = rng.sample_indices(spec.n, n_anom)
        spike = spec.anomaly_magnitude * spec.noise_std
        for i in indices:
            sign = 1.0 if rng.uniform() < 0.5 else -1.0
            values[i] += sign * spike
        anomalous = set(indices)

    obs = [Observation(t, values[t], t in anomalous) for t in range(spec.n)]
    drift_name = type(drift).__name__ if drift is not None else "none"
    return LabeledSeries(
        observations=obs,
        name="synthetic",
        source=f"synthetic(seed={spec.seed}, drift={drift_name})",
        season=spec.period,
    )


def inject_c_to_f(series: LabeledSeries, rate: float, seed: int) -> LabeledSeries:
    """Relabel a random ``rate`` fraction of points as Fahrenheit readings.

    Selected values are mapped C -> C * 9/5 + 32 and marked anomalous; all
    other values are carried over bit-exactly with an explicit False label
    (the output is a fully labeled dataset, unless the input already carried
    a positive label). Selection is positional and reproducible from the
    seed.
    """
    if not (isinstance(rate, (int, float)) and 0.0 < rate < 1.0):
        raise RateOutOfRange(f"rate must lie in (0, 1), got {rate!r}")
    n = len(series.observations)
    k = int(rate * n)
    chosen = set(Rng(seed).sample_indices(n, k)) if k > 0 else set()
    obs = []
    for i, o in enumerate(series.observations):
        if i in chosen:
            obs.append(Observation(o.t, o.value * 9.0 / 5.0 + 32.0, True))
        else:
            obs.append(Observation(o.t, o.value, bool(o.label)))
    return LabeledSeries(
        observations=obs,
        name=series.name,
        source=series.source,
        units=series.units,
        season=series.season,
        timestamps=series.timestamps,
    )


_TRUE_LABELS = {"1", "true", "True", "TRUE"}
_FALSE_LABELS = {"0", "false", "False", "FALSE", ""}


def _parse_label(text: str, row: int) -> bool:
    if text in _TRUE_LABELS:
        return True
    if text in _FALSE_LABELS:
        return False
    raise ParseError(f"row {row}: cannot parse label {text!r}")


def _time_key(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(
    path,
    time_col: str = "time",
    value_col: str = "value",
    label_col: str | None = "label",
) -> LabeledSeries:
    """Load ``time,value[,label]`` CSV with a header row.

    Rows become observations with ticks 0..n-1; the time column is kept as
    metadata and must strictly increase (numerically when numeric,
    lexicographically otherwise). Errors name the offending 1-based file
    row. The label column is optional under its default name; naming one
    explicitly makes it required.
    """
    fh = open(path, newline="", encoding="utf-8") if path != "-" else None
    try:
        reader = csv.reader(fh if fh is not None else sys.stdin)
        header = next(reader, None)
        if header is None:
            raise MissingColumn("input has no header row")
        header = [h.strip() for h in header]
        cols = {name: i for i, name in enumerate(header)}
        if time_col not in cols:
            raise MissingColumn(f"missing column {time_col!r} in header {header}")
        if value_col not in cols:
            raise MissingColumn(f"missing column {value_col!r} in header {header}")
        label_idx = None
        if label_col is not None:
            if label_col in cols:
                label_idx = cols[label_col]
            elif label_col != "label":
                raise MissingColumn(f"missing column {label_col!r} in header {header}")
        t_idx = cols[time_col]
        v_idx = cols[value_col]

        observations = []
        timestamps = []
        prev_key = None
        tick = 0
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t_text = row[t_idx].strip()
                v_text = row[v_idx].strip()
            except IndexError:
                raise ParseError(f"row {row_num}: expected {len(header)} fields, got {len(row)}")
            try:
                value = float(v_text)
            except ValueError:
                raise ParseError(f"row {row_num}: cannot parse value {v_text!r}")
            if not math.isfinite(value):
                raise NonFiniteValue(f"row {row_num}: non-finite value {v_text!r}")
            key = _time_key(t_text)
            if prev_key is not None:
                same_type = type(key) is type(prev_key)
                if not same_type or not key > prev_key:
                    raise NonMonotoneTime(
                        f"row {row_num}: time {t_text!r} does not increase"
                    )
            prev_key = key
            label = _parse_label(row[label_idx].strip(), row_num) if label_idx is not None else False
            observations.append(Observation(tick, value, label))
            timestamps.append(t_text)
            tick += 1
    finally:
        if fh is not None:
            fh.close()
    name = Path(path).stem if path != "-" else "stdin"
    return LabeledSeries(
        observations=observations,
        name=name,
        source=str(path),
        timestamps=timestamps,
    )


def write_csv(series: LabeledSeries, path) -> None:
    """Write ``time,value,label`` rows; values keep full float precision.

    ``path`` may be ``"-"`` for standard output.
    """
    ts = series.timestamps
    fh = open(path, "w", newline="", encoding="utf-8") if path != "-" else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["time", "value", "label"])
        for i, o in enumerate(series.observations):
            stamp = ts[i] if ts is not None else o.t
            writer.writerow([stamp, repr(o.value), int(bool(o.label))])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _parse_timestamp(text: str, row: int | None = None) -> datetime:
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        where = f"row {row}: " if row is not None else ""
        raise ParseError(f"{where}cannot parse timestamp {text!r}")


def read_nab_csv(path, windows, name: str | None = None) -> LabeledSeries:
    """Load a ``timestamp,value`` CSV with anomaly windows as labels.

    ``windows`` is a list of ``[start, end]`` timestamp pairs, or a path to
    a JSON file holding either such a list or a mapping from dataset name to
    lists (the combined-windows layout); ``name`` (or the file name) picks
    the entry. Points inside any window, bounds inclusive, are labeled.
    """
    if not isinstance(windows, (list, tuple)):
        with open(windows, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if isinstance(loaded, dict):
            if name is not None and name in loaded:
                key = name
            else:
                base = str(path)
                matches = [k for k in loaded if base.endswith(k) or k.endswith(Path(path).name)]
                if len(matches) != 1:
                    raise MissingColumn(
                        f"cannot pick a window entry for {path!r}; candidates: {sorted(loaded)}"
                    )
                key = matches[0]
            windows = loaded[key]
        else:
            windows = loaded

    bounds = []
    for pair in windows:
        if len(pair) != 2:
            raise ParseError(f"window {pair!r} is not a [start, end] pair")
        bounds.append((_parse_timestamp(pair[0]), _parse_timestamp(pair[1])))

    series = read_csv(path, time_col="timestamp", value_col="value", label_col=None)
    observations = []
    assert series.timestamps is not None
    for o, stamp in zip(series.observations, series.timestamps):
        ts = _parse_timestamp(stamp, row=o.t + 2)
        label = any(start <= ts <= end for start, end in bounds)
        observations.append(Observation(o.t, o.value, label))
    series.observations = observations
    return series


def resample_mean(series: LabeledSeries, every: int) -> LabeledSeries:
    """Aggregate consecutive groups of ``every`` points by mean.

    The group label is True when any member was anomalous. A trailing
    partial group is dropped so seasonality stays aligned.
    """
    if not isinstance(every, int) or every < 1:
        raise InvalidSpec(f"every must be an integer >= 1, got {every!r}")
    obs = series.observations
    out = []
    for g in range(len(obs) // every):
        chunk = obs[g * every : (g + 1) * every]
        mean = sum(o.value for o in chunk) / every
        label = any(o.label for o in chunk)
        out.append(Observation(g, mean, label))
    return LabeledSeries(
        observations=out,
        name=series.name,
        source=series.source,
        units=series.units,
        season=series.season,
    )
