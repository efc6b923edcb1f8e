"""Simulator and checker for monotonic searchability in self-stabilizing
sorted-list overlays."""

from .config import ConfigError, ScenarioConfig
from .harness import Report, replay, run_scenario, run_suite, shrink

__all__ = [
    "ConfigError",
    "Report",
    "ScenarioConfig",
    "replay",
    "run_scenario",
    "run_suite",
    "shrink",
]
__version__ = "0.1.0"
