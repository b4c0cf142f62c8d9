"""Experiment harness: configuration, training loop, sweeps, CLI."""

from .config import (
    DEFAULTS,
    ConfigError,
    ExperimentConfig,
    config_from_pairs,
    config_from_text,
    load_config,
    with_overrides,
)
from .runner import (
    METRICS_COLUMNS,
    Checkpoint,
    CorrelationReport,
    MetricsRow,
    build_state,
    compare_metrics_csv,
    correlate,
    gap_cmd,
    lambda_sweep_cmd,
    load_checkpoint,
    pearson_r,
    probe_cmd,
    ratio_sweep_cmd,
    read_metrics,
    rebuild_splits,
    train,
)

__all__ = [
    "DEFAULTS",
    "METRICS_COLUMNS",
    "MetricsRow",
    "Checkpoint",
    "ConfigError",
    "CorrelationReport",
    "ExperimentConfig",
    "build_state",
    "compare_metrics_csv",
    "config_from_pairs",
    "config_from_text",
    "correlate",
    "gap_cmd",
    "lambda_sweep_cmd",
    "load_checkpoint",
    "load_config",
    "pearson_r",
    "probe_cmd",
    "ratio_sweep_cmd",
    "read_metrics",
    "rebuild_splits",
    "train",
    "with_overrides",
]
