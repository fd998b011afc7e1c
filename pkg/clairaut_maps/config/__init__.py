"""
Configuration for verification runs.

Provides layered numeric settings, scenario loading from files or the
built-in corpus, and validation of scenario check blocks.
"""

from .settings import VerificationSettings
from .scenario import Scenario
from .scenario_manager import ScenarioManager, get_scenario_manager
from .validation import (
    KIND_PARAMETERS, ScenarioValidator, ValidationResult, validate_scenario
)

__all__ = [
    "VerificationSettings",
    "Scenario",
    "ScenarioManager",
    "get_scenario_manager",
    "KIND_PARAMETERS",
    "ScenarioValidator",
    "ValidationResult",
    "validate_scenario"
]
