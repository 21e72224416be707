from .config import ConfigError, ExperimentConfig, load_config
from .latch import CompletionLatch
from .runner import ExperimentReport, FoldResult, derive_seed, run_experiment

__all__ = [
    "CompletionLatch",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "FoldResult",
    "derive_seed",
    "load_config",
    "run_experiment",
]
