from .config import ConfigError, ExperimentConfig, load_config
from .runner import OracleMismatchError, run_experiment, run_oracle_check
from .report import emit_plot_png, emit_plot_svg, emit_summary_csv

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "OracleMismatchError",
    "emit_plot_png",
    "emit_plot_svg",
    "emit_summary_csv",
    "load_config",
    "run_experiment",
    "run_oracle_check",
]
