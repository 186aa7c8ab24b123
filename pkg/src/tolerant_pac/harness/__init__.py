"""Experiment orchestration: distributions, configs, sweeps and invariant suites."""
from .config import ConfigError, ExperimentConfig, load_config, read_config
from .distributions import SyntheticDistribution, finite_distribution, labeled_support, mixture, uniform_box
from .experiment import CSV_COLUMNS, ResultRow, rows_to_csv, run_experiment, summarize, summary_to_csv
from .invariants import SUITES, verify_invariants

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "read_config",
    "SyntheticDistribution", "finite_distribution", "labeled_support", "mixture", "uniform_box",
    "CSV_COLUMNS", "ResultRow", "rows_to_csv", "run_experiment", "summarize", "summary_to_csv",
    "SUITES", "verify_invariants",
]
