import numpy as np
import pytest
import yaml

from slimeways.citymap import load_scenario, write_pgm


def make_scenario_files(tmp_path, raster, cities, vicinity_radius=2,
                        nutrient="low", coverage=0.5, runs=1, steps=10,
                        snapshot_steps=(), base_seed=7, params=None):
    """Write a map + config pair and return the config path."""
    map_path = tmp_path / "map.pgm"
    write_pgm(map_path, raster)
    doc = {
        "map": {"path": "map.pgm"},
        "cities": {
            "vicinity_radius": vicinity_radius,
            "positions": [{"name": n, "x": x, "y": y} for n, x, y in cities],
        },
        "params": params or {},
        "experiment": {
            "nutrient_level": nutrient,
            "coverage": coverage,
            "runs": runs,
            "steps": steps,
            "snapshot_steps": list(snapshot_steps),
            "base_seed": base_seed,
        },
    }
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text(yaml.safe_dump(doc))
    return cfg


def open_ground(width, height):
    """All-habitable raster."""
    return np.full((height, width), 255, dtype=np.uint8)


@pytest.fixture
def toy_scenario(tmp_path):
    raster = open_ground(30, 30)
    cfg = make_scenario_files(
        tmp_path, raster,
        cities=[("A", 5, 15), ("B", 25, 15)],
        vicinity_radius=2, coverage=0.3, runs=2, steps=10, base_seed=11,
    )
    return load_scenario(cfg)
