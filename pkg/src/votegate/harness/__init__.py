"""Experiment orchestration: config, multi-split runs, reports, CLI."""

from .config import ExperimentConfig, load_config
from .experiment import ablation_sweep, run_experiment, validate_guarantee
from .report import write_ablation_report, write_guarantee_report, write_report

__all__ = [
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    "validate_guarantee",
    "ablation_sweep",
    "write_report",
    "write_guarantee_report",
    "write_ablation_report",
]
