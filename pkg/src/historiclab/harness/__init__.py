"""Command-line harness: scenario configs, presets, runs and artifacts."""

from .config import AverageScheme, ScenarioConfig, Tolerances, validate_config
from .presets import PRESETS, list_presets
from .runner import RunManifest, run_scenario

__all__ = [
    "AverageScheme",
    "PRESETS",
    "RunManifest",
    "ScenarioConfig",
    "Tolerances",
    "list_presets",
    "run_scenario",
    "validate_config",
]
