"""Discrete-event simulation of containerized microservice chains."""

from .engine import EngineOptions, RunResult, Simulation, run
from .errors import ChainsimError, ScenarioError, SimulationError
from .scenario import ScenarioBundle, load_scenario, parse_scenario, serialize_scenario, validate_bundle

__all__ = [
    "ChainsimError", "EngineOptions", "RunResult", "ScenarioBundle", "ScenarioError", "Simulation",
    "SimulationError", "load_scenario", "parse_scenario", "run", "serialize_scenario", "validate_bundle",
]
__version__ = "0.1.0"
