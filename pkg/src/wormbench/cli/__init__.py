from .dataset import Simulation, build_topology, mix_seed, run_dataset
from .main import main
from .scenario import (
    PRESET_IDS,
    Scenario,
    ScenarioError,
    build_scenario,
    parse_scenario,
    preset,
    preset_data,
)

__all__ = [
    "PRESET_IDS",
    "Scenario",
    "ScenarioError",
    "Simulation",
    "build_scenario",
    "build_topology",
    "main",
    "mix_seed",
    "parse_scenario",
    "preset",
    "preset_data",
    "run_dataset",
]
