"""Scenario-driven command-line frontend."""

from .main import main
from .runner import run
from .scenario import RunManifest
from .scenario import Scenario
from .scenario import parse_config

__all__ = ["RunManifest", "Scenario", "main", "parse_config", "run"]
