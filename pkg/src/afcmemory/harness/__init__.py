"""Config-driven experiment runner."""

from .config import EXPERIMENTS, ConfigError, ExperimentConfig, config_hash, serialize, validate_config
from .experiments import EXPERIMENT_RUNNERS, run_experiment
from .report import RunReport

__all__ = [
    "EXPERIMENTS",
    "EXPERIMENT_RUNNERS",
    "ConfigError",
    "ExperimentConfig",
    "RunReport",
    "config_hash",
    "run_experiment",
    "serialize",
    "validate_config",
]
