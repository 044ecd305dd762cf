"""Paths to the data files shipped with the package."""

from importlib import resources
from pathlib import Path


def data_dir() -> Path:
    return Path(resources.files("slimeways") / "data")


def italy_scenario_path() -> Path:
    return data_dir() / "italy_scenario.yaml"


def italy_habitat_path() -> Path:
    return data_dir() / "italy_habitat.pgm"


def roman_roads_path() -> Path:
    return data_dir() / "roman_roads.json"
