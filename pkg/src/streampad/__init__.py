"""Streaming anomaly detection for non-stationary time series.

An online seasonal forecaster trained by gradient descent produces
one-step predictions; their errors become anomaly scores through
statistically grounded thresholds; adaptive windowing detects drift; and a
benchmark harness compares the online detector against batch baselines
under no, scheduled, and drift-triggered retraining.
"""

from .core import (
    GAUSSIAN,
    GUMBEL,
    MEAN_SIGMA,
    AlphaOutOfRange,
    ConfigError,
    DataError,
    DetectorConfig,
    NTooSmall,
    Observation,
    ScoredPoint,
    StreamPadError,
    ThresholdRule,
    validate_config,
)
from .dataio import (
    IncrementalDrift,
    LabeledSeries,
    Rng,
    SuddenDrift,
    SynthSpec,
    generate_synthetic,
    inject_c_to_f,
    read_csv,
    read_nab_csv,
    resample_mean,
    write_csv,
)
from .detector import PadDetector
from .drift import Adwin
from .evaluation import (
    CONTENDERS,
    BaselineDetector,
    MetricsReport,
    auc_roc,
    f1_sweep,
    mae_mse,
    run_benchmark,
)
from .forecast import Differencer, SnarimaxModel, WindowedArBaseline
from .stats import OnlineScaler, RunningStats
from .thresholds import (
    GumbelConstants,
    gumbel_quantile,
    half_normal_quantile,
    tau_from_stats,
    tau_gaussian,
    tau_gumbel,
    tau_mean_sigma,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "StreamPadError",
    "ConfigError",
    "DataError",
    "AlphaOutOfRange",
    "NTooSmall",
    "Observation",
    "ScoredPoint",
    "ThresholdRule",
    "MEAN_SIGMA",
    "GAUSSIAN",
    "GUMBEL",
    "DetectorConfig",
    "validate_config",
    "RunningStats",
    "OnlineScaler",
    "Differencer",
    "SnarimaxModel",
    "WindowedArBaseline",
    "GumbelConstants",
    "tau_mean_sigma",
    "half_normal_quantile",
    "tau_gaussian",
    "gumbel_quantile",
    "tau_gumbel",
    "tau_from_stats",
    "PadDetector",
    "Adwin",
    "MetricsReport",
    "mae_mse",
    "f1_sweep",
    "auc_roc",
    "BaselineDetector",
    "CONTENDERS",
    "run_benchmark",
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
