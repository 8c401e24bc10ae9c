"""RIS-assisted grant-free random access simulator."""

from .config import ScenarioConfig, scenario_from
from .experiments import MetricsRow, estimate_metrics, run_preset, run_trials, sweep, write_csv
from .protocol import FrameOutcome, compile_scenario, run_frame

__version__ = "0.1.0"

__all__ = [
    "FrameOutcome",
    "MetricsRow",
    "ScenarioConfig",
    "compile_scenario",
    "estimate_metrics",
    "run_frame",
    "run_preset",
    "run_trials",
    "scenario_from",
    "sweep",
    "write_csv",
    "__version__",
]
