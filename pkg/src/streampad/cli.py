"""Command line front end.

Four subcommands cover the workflow end to end::

    streampad detect    score a CSV stream, emit scored records
    streampad benchmark compare contenders on a labeled dataset
    streampad synth     generate synthetic data or inject anomalies
    streampad plotdata  reshape scored records for external plotting

Flag precedence is command line > config file (--config, KEY=VALUE lines)
> built-in defaults. Exit codes: 0 success, 2 configuration error, 3 data
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .core import (
    ConfigError,
    DataError,
    MalformedRecord,
    Observation,
    ParseError,
)
from .dataio import (
    IncrementalDrift,
    SuddenDrift,
    SynthSpec,
    generate_synthetic,
    inject_c_to_f,
    read_csv,
    write_csv,
)
from .detector import PadDetector
from .evaluation import run_benchmark

__all__ = ["main", "build_parser"]

SCORED_SCHEMA = "streampad/scored"
BENCH_SCHEMA = "streampad/benchmark"
SCHEMA_VERSION = 1

_MODEL_KEYS = {
    "p": int,
    "d": int,
    "q": int,
    "P": int,
    "D": int,
    "Q": int,
    "s": int,
    "lr": float,
    "rule": str,
    "c": float,
    "alpha": float,
    "gumbel_n": int,
    "warmup": int,
    "error_decay": float,
    "learn_on_anomaly": bool,
}
_OTHER_KEYS = {
    "seed": int,
    "repeats": int,
    "contenders": str,
    "n": int,
    "level": float,
    "trend": float,
    "amplitude": float,
    "period": int,
    "noise_std": float,
    "drift": str,
    "drift_at": int,
    "drift_delta": float,
    "drift_from": int,
    "drift_to": int,
    "rate": float,
    "magnitude": float,
}

DEFAULTS = {
    "p": 2,
    "d": 1,
    "q": 2,
    "P": 2,
    "D": 0,
    "Q": 2,
    "s": 52,
    "lr": 0.001,
    "rule": "mean-sigma",
    "c": 3.0,
    "alpha": 0.05,
    "gumbel_n": None,
    "warmup": None,
    "error_decay": 0.01,
    "learn_on_anomaly": True,
    "seed": 0,
    "repeats": 100,
    "contenders": "oml-ad,baseline-none,baseline-scheduled,baseline-dynamic",
    "n": 2000,
    "level": 10.0,
    "trend": 0.0,
    "amplitude": 5.0,
    "period": 52,
    "noise_std": 1.0,
    "drift": "none",
    "drift_at": None,
    "drift_delta": 0.0,
    "drift_from": None,
    "drift_to": None,
    "rate": 0.01,
    "magnitude": 8.0,
}


def _parse_config_value(key: str, text: str):
    caster = _MODEL_KEYS.get(key) or _OTHER_KEYS.get(key)
    if caster is None:
        raise ConfigError(f"unknown config key {key!r}")
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if caster is bool:
        if text.lower() in ("1", "true", "yes"):
            return True
        if text.lower() in ("0", "false", "no"):
            return False
        raise ConfigError(f"cannot parse boolean {key}={text!r}")
    try:
        return caster(text)
    except ValueError:
        raise ConfigError(f"cannot parse {key}={text!r} as {caster.__name__}")


def _load_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line_num, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_num}: expected KEY=VALUE, got {line!r}")
                key, _, text = line.partition("=")
                key = key.strip().replace("-", "_")
                values[key] = _parse_config_value(key, text)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    return values


def _resolve(ns: argparse.Namespace) -> dict:
    resolved = dict(DEFAULTS)
    config_path = getattr(ns, "config", None)
    if config_path:
        resolved.update(_load_config_file(config_path))
    for key in list(_MODEL_KEYS) + list(_OTHER_KEYS):
        value = getattr(ns, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _detector_params(resolved: dict) -> dict:
    return {
        "p": resolved["p"],
        "d": resolved["d"],
        "q": resolved["q"],
        "P": resolved["P"],
        "D": resolved["D"],
        "Q": resolved["Q"],
        "s": resolved["s"],
        "learning_rate": resolved["lr"],
        "rule": resolved["rule"],
        "c": resolved["c"],
        "alpha": resolved["alpha"],
        "gumbel_n": resolved["gumbel_n"],
        "learn_on_anomaly": resolved["learn_on_anomaly"],
        "error_decay": resolved["error_decay"],
    }


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("model")
    g.add_argument("--p", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--P", type=int)
    g.add_argument("--D", type=int)
    g.add_argument("--Q", type=int)
    g.add_argument("--s", type=int, help="season length")
    g.add_argument("--lr", type=float, help="learning rate")
    g.add_argument("--rule", choices=["mean-sigma", "gaussian", "gumbel"])
    g.add_argument("--c", type=float, help="mean-sigma multiplier")
    g.add_argument("--alpha", type=float, help="significance level")
    g.add_argument("--gumbel-n", dest="gumbel_n", type=int)
    g.add_argument("--warmup", type=int)
    g.add_argument("--error-decay", dest="error_decay", type=float)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="KEY=VALUE config file")
    parser.add_argument("--verbose", action="store_true")


def _add_synth_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("synthetic data")
    g.add_argument("--n", type=int)
    g.add_argument("--level", type=float)
    g.add_argument("--trend", type=float)
    g.add_argument("--amplitude", type=float)
    g.add_argument("--period", type=int)
    g.add_argument("--noise-std", dest="noise_std", type=float)
    g.add_argument("--drift", choices=["none", "sudden", "incremental"])
    g.add_argument("--drift-at", dest="drift_at", type=int)
    g.add_argument("--drift-delta", dest="drift_delta", type=float)
    g.add_argument("--drift-from", dest="drift_from", type=int)
    g.add_argument("--drift-to", dest="drift_to", type=int)
    g.add_argument("--rate", type=float, help="anomaly rate")
    g.add_argument("--magnitude", type=float, help="spike size in noise stds")
    g.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streampad",
        description="Streaming anomaly detection over univariate time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="score a CSV stream")
    p_detect.add_argument("input", help="CSV path or - for stdin")
    p_detect.add_argument("-o", "--output", default="-", help="output path or -")
    p_detect.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p_detect.add_argument("--time-col", default="time")
    p_detect.add_argument("--value-col", default="value")
    p_detect.add_argument("--state-in", help="resume from a state snapshot")
    p_detect.add_argument("--state-out", help="write a state snapshot after the run")
    _add_model_flags(p_detect)
    _add_common_flags(p_detect)

    p_bench = sub.add_parser("benchmark", help="compare contenders on labeled data")
    p_bench.add_argument("--input", help="labeled CSV; omit to use synthetic data")
    p_bench.add_argument("--contenders", help="comma-separated contender names")
    p_bench.add_argument("--repeats", type=int)
    p_bench.add_argument("--json", dest="json_out", help="write a JSON report here")
    p_bench.add_argument(
        "--no-timing",
        action="store_true",
        help="omit wall-clock fields so reports are byte-reproducible",
    )
    p_bench.add_argument("--time-col", default="time")
    p_bench.add_argument("--value-col", default="value")
    p_bench.add_argument("--label-col", default="label")
    _add_model_flags(p_bench)
    _add_synth_flags(p_bench)
    _add_common_flags(p_bench)

    p_synth = sub.add_parser("synth", help="generate synthetic data")
    p_synth.add_argument("-o", "--output", default="-", help="output path or -")
    p_synth.add_argument(
        "--inject-cf",
        dest="inject_cf",
        help="instead of generating, inject unit-mixup anomalies into this CSV",
    )
    p_synth.add_argument("--time-col", default="time")
    p_synth.add_argument("--value-col", default="value")
    _add_synth_flags(p_synth)
    _add_common_flags(p_synth)

    p_plot = sub.add_parser("plotdata", help="reshape scored records for plotting")
    p_plot.add_argument("input", help="scored JSONL/CSV path or - for stdin")
    p_plot.add_argument("-o", "--output", default="-", help="output path or -")
    _add_common_flags(p_plot)

    return parser


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", encoding="utf-8")


def _verbose_dump(resolved: dict, extra: dict | None = None) -> None:
    merged = dict(resolved)
    if extra:
        merged.update(extra)
    print("resolved config: " + json.dumps(merged, sort_keys=True, default=str), file=sys.stderr)


def cmd_detect(ns: argparse.Namespace) -> int:
    resolved = _resolve(ns)
    if ns.state_in:
        with open(ns.state_in, encoding="utf-8") as fh:
            try:
                record = json.load(fh)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"state file {ns.state_in}: {exc}")
        det = PadDetector.restore(record)
    else:
        det = PadDetector(warmup=resolved["warmup"], **_detector_params(resolved))
    det._ensure_state()  # reject a bad config before any output is written
    if ns.verbose:
        _verbose_dump(resolved, {"state_in": ns.state_in, "input": ns.input})

    series = read_csv(ns.input, time_col=ns.time_col, value_col=ns.value_col)
    offset = getattr(det, "last_tick_", None)
    offset = offset + 1 if offset is not None else 0

    out = _open_out(ns.output)
    try:
        if ns.format == "jsonl":
            header = {
                "schema": SCORED_SCHEMA,
                "version": SCHEMA_VERSION,
                "config": {k: resolved[k] for k in _MODEL_KEYS},
            }
            out.write(json.dumps(header, sort_keys=True) + "\n")
        else:
            out.write("t,value,prediction,error,threshold,score,flag\n")
        for i, obs in enumerate(series.observations):
            point = det.score_learn_one(Observation(offset + i, obs.value, obs.label))
            if point is None:
                continue
            if ns.format == "jsonl":
                rec = {
                    "t": point.t,
                    "value": point.truth,
                    "prediction": point.prediction,
                    "error": point.error,
                    "threshold": point.threshold,
                    "score": point.score,
                    "flag": int(point.flag),
                }
                out.write(json.dumps(rec) + "\n")
            else:
                out.write(
                    f"{point.t},{point.truth!r},{point.prediction!r},{point.error!r},"
                    f"{point.threshold!r},{point.score!r},{int(point.flag)}\n"
                )
    finally:
        if out is not sys.stdout:
            out.close()

    if ns.state_out:
        with open(ns.state_out, "w", encoding="utf-8") as fh:
            json.dump(det.snapshot(), fh, sort_keys=True)
            fh.write("\n")
    return 0


def _build_drift(resolved: dict):
    kind = resolved["drift"]
    if kind in (None, "none"):
        return None
    if kind == "sudden":
        if resolved["drift_at"] is None:
            raise ConfigError("sudden drift requires --drift-at")
        return SuddenDrift(at=resolved["drift_at"], delta=resolved["drift_delta"])
    if kind == "incremental":
        if resolved["drift_from"] is None or resolved["drift_to"] is None:
            raise ConfigError("incremental drift requires --drift-from and --drift-to")
        return IncrementalDrift(
            start=resolved["drift_from"],
            end=resolved["drift_to"],
            total_delta=resolved["drift_delta"],
        )
    raise ConfigError(f"unknown drift kind {kind!r}")


def _build_spec(resolved: dict) -> SynthSpec:
    return SynthSpec(
        n=resolved["n"],
        level=resolved["level"],
        trend=resolved["trend"],
        amplitude=resolved["amplitude"],
        period=resolved["period"],
        noise_std=resolved["noise_std"],
        drift=_build_drift(resolved),
        anomaly_rate=resolved["rate"],
        anomaly_magnitude=resolved["magnitude"],
        seed=resolved["seed"],
    )


def cmd_benchmark(ns: argparse.Namespace) -> int:
    resolved = _resolve(ns)
    contenders = [c.strip() for c in resolved["contenders"].split(",") if c.strip()]
    if ns.input:
        series = read_csv(
            ns.input, time_col=ns.time_col, value_col=ns.value_col, label_col=ns.label_col
        )
        dataset_desc = {"name": series.name, "source": "file"}
    else:
        spec = _build_spec(resolved)
        series = generate_synthetic(spec)
        dataset_desc = {"name": "synthetic", "source": "generated"}
    if ns.verbose:
        _verbose_dump(resolved, {"contenders": contenders, "dataset": dataset_desc["name"]})

    reports = run_benchmark(
        series,
        contenders,
        repeats=resolved["repeats"],
        warmup=resolved["warmup"],
        timing=not ns.no_timing,
        detector_params=_detector_params(resolved),
    )

    headers = ["contender", "mae", "mse", "f1", "auc_roc", "mean_ms", "std_ms", "n", "anomalies"]
    rows = []
    for r in reports:
        rows.append(
            [
                r.contender,
                f"{r.mae:.4f}",
                f"{r.mse:.4f}",
                f"{r.f1:.4f}",
                f"{r.auc_roc:.4f}",
                "-" if r.mean_time_ms is None else f"{r.mean_time_ms:.2f}",
                "-" if r.std_time_ms is None else f"{r.std_time_ms:.2f}",
                str(r.n_points),
                str(r.n_anomalies),
            ]
        )
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(headers)]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))

    if ns.json_out:
        doc = {
            "schema": BENCH_SCHEMA,
            "version": SCHEMA_VERSION,
            "dataset": {
                **dataset_desc,
                "n": len(series.observations),
                "anomalies": sum(series.labels()),
            },
            "config": {
                **{k: resolved[k] for k in _MODEL_KEYS},
                "seed": resolved["seed"],
                "repeats": resolved["repeats"],
                "contenders": contenders,
            },
            "results": [r.to_dict() for r in reports],
        }
        payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        if ns.json_out == "-":
            sys.stdout.write(payload)
        else:
            with open(ns.json_out, "w", encoding="utf-8") as fh:
                fh.write(payload)
    return 0


def cmd_synth(ns: argparse.Namespace) -> int:
    resolved = _resolve(ns)
    if ns.verbose:
        _verbose_dump(resolved, {"inject_cf": ns.inject_cf, "output": ns.output})
    if ns.inject_cf:
        series = read_csv(ns.inject_cf, time_col=ns.time_col, value_col=ns.value_col)
        series = inject_c_to_f(series, rate=resolved["rate"], seed=resolved["seed"])
        drift_name = "none"
    else:
        spec = _build_spec(resolved)
        series = generate_synthetic(spec)
        drift_name = resolved["drift"] or "none"
    write_csv(series, ns.output)
    summary = (
        f"n={len(series.observations)} anomalies={sum(series.labels())} drift={drift_name}"
    )
    print(summary, file=sys.stderr if ns.output == "-" else sys.stdout)
    return 0


def _iter_scored_records(fh):
    """Yield scored-record dicts from JSONL or CSV detect output."""
    reader = None
    for line_num, raw in enumerate(fh, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("{"):
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"row {line_num}: {exc}")
            if rec.get("schema") is not None:
                if rec.get("schema") != SCORED_SCHEMA:
                    raise MalformedRecord(f"row {line_num}: unexpected schema {rec.get('schema')!r}")
                continue
            yield line_num, rec
        else:
            cells = next(csv.reader([line]))
            if reader is None:
                reader = cells
                expected = ["t", "value", "prediction", "error", "threshold", "score", "flag"]
                if cells != expected:
                    raise MalformedRecord(f"row {line_num}: unexpected CSV header {cells!r}")
                continue
            if len(cells) != 7:
                raise ParseError(f"row {line_num}: expected 7 fields, got {len(cells)}")
            yield line_num, {
                "t": cells[0],
                "value": cells[1],
                "prediction": cells[2],
                "error": cells[3],
                "threshold": cells[4],
                "score": cells[5],
                "flag": cells[6],
            }


def cmd_plotdata(ns: argparse.Namespace) -> int:
    fh = sys.stdin if ns.input == "-" else open(ns.input, encoding="utf-8")
    out = _open_out(ns.output)
    try:
        out.write("t,truth,prediction,error,threshold,flags\n")
        for line_num, rec in _iter_scored_records(fh):
            try:
                t = int(rec["t"])
                truth = float(rec["value"])
                pred = float(rec["prediction"])
                err = float(rec["error"])
                thr = float(rec["threshold"])
                flag = int(rec["flag"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"row {line_num}: bad scored record ({exc})")
            if flag not in (0, 1):
                raise ParseError(f"row {line_num}: flag must be 0 or 1, got {flag!r}")
            out.write(f"{t},{truth!r},{pred!r},{err!r},{thr!r},{flag}\n")
    finally:
        if fh is not sys.stdin:
            fh.close()
        if out is not sys.stdout:
            out.close()
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    handlers = {
        "detect": cmd_detect,
        "benchmark": cmd_benchmark,
        "synth": cmd_synth,
        "plotdata": cmd_plotdata,
    }
    try:
        return handlers[ns.command](ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        # the downstream consumer closed the pipe (e.g. `| head`); park
        # stdout on devnull so the interpreter's exit flush stays quiet
        try:
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        except (OSError, ValueError, AttributeError):
            pass  # stdout is not a real pipe (in-process caller)
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
