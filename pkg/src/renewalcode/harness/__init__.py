"""Monte Carlo sampling, empirical comparison and config-driven runs."""

from .compare import binomial_check, conditional_rate, empirical_compare, return_times
from .config import CHECKS, ConfigError, run_config
from .sampling import SampleSpec, sample_path, sample_states

__all__ = [
    "CHECKS",
    "ConfigError",
    "SampleSpec",
    "binomial_check",
    "conditional_rate",
    "empirical_compare",
    "return_times",
    "run_config",
    "sample_path",
    "sample_states",
]
