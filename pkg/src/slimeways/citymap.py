"""Habitat map and scenario ingestion.

A habitat map is a 2D lattice of cell classes (habitable / obstacle /
outside) loaded from an 8-bit greyscale raster (PGM P5 or PNG).  A
scenario bundles the map with named city positions, nutrient level,
model parameters and experiment settings, loaded from a YAML document.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from .params import ModelParams

# Cell classes
OUTSIDE = 0
HABITABLE = 1
OBSTACLE = 2

DEFAULT_GREY_MAPPING = {255: "habitable", 0: "outside", 128: "obstacle"}

_CLASS_CODE = {"habitable": HABITABLE, "obstacle": OBSTACLE, "outside": OUTSIDE}


class ScenarioError(ValueError):
    """Configuration or map validation failure; names the offending field."""


@dataclass(frozen=True)
class HabitatMap:
    """Lattice of cell classes.  `cells[y, x]` with shape (height, width)."""

    cells: np.ndarray  # uint8, values in {OUTSIDE, HABITABLE, OBSTACLE}
    source: str = "<memory>"

    def __post_init__(self):
        if self.cells.ndim != 2:
            raise ScenarioError("map: raster must be single-channel 2D")
        h, w = self.cells.shape
        if h < 3 or w < 3:
            raise ScenarioError(f"map: dimensions {w}x{h} below minimum 3x3")
        if not (self.cells == HABITABLE).any():
            raise ScenarioError("map: no habitable cells")
        self.cells.setflags(write=False)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def habitable_count(self) -> int:
        return int((self.cells == HABITABLE).sum())

    def class_counts(self) -> dict[str, int]:
        return {
            name: int((self.cells == code).sum())
            for name, code in _CLASS_CODE.items()
        }

    def is_habitable(self, x: int, y: int) -> bool:
        if 0 <= x < self.width and 0 <= y < self.height:
            return self.cells[y, x] == HABITABLE
        return False


def _read_pgm(data: bytes) -> np.ndarray:
    """Minimal binary PGM (P5) reader, maxval <= 255."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise ScenarioError("map: truncated PGM header")
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        if data[pos : pos + 1].isspace():
            pos += 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ScenarioError(f"map: unsupported PGM magic {tokens[0]!r}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ScenarioError("map: only 8-bit PGM supported")
    pos += 1  # single whitespace after maxval
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return raster.reshape(height, width).copy()


def write_pgm(path, array: np.ndarray):
    arr = np.asarray(array, dtype=np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + arr.tobytes())


def _read_raster(path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return _read_pgm(data)
    from PIL import Image

    img = Image.open(io.BytesIO(data))
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img, dtype=np.uint8).copy()


def load_map(image, grey_mapping: dict[int, str] | None = None) -> HabitatMap:
    """Load a habitat map from an 8-bit greyscale raster.

    `image` may be a path or a numpy array.  `grey_mapping` maps grey
    values to class names ("habitable" / "obstacle" / "outside"); grey
    values not covered by the mapping are an error.
    """
    mapping = dict(DEFAULT_GREY_MAPPING if grey_mapping is None else grey_mapping)
    if isinstance(image, (str, Path)):
        raster = _read_raster(image)
        source = str(image)
    else:
        raster = np.asarray(image, dtype=np.uint8)
        source = "<array>"
    if raster.size == 0:
        raise ScenarioError("map: empty image")
    lut = np.full(256, 255, dtype=np.uint8)  # 255 = unmapped sentinel
    for grey, cls in mapping.items():
        if cls not in _CLASS_CODE:
            raise ScenarioError(f"map: unknown cell class {cls!r}")
        lut[int(grey)] = _CLASS_CODE[cls]
    cells = lut[raster]
    if (cells == 255).any():
        bad = sorted(np.unique(raster[cells == 255]).tolist())
        raise ScenarioError(f"map: grey values {bad} not covered by mapping")
    return HabitatMap(cells=cells, source=source)


@dataclass(frozen=True)
class CitySet:
    """Named city cells plus the shared vicinity radius (cells)."""

    cities: tuple[tuple[str, int, int], ...]
    vicinity_radius: int

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c[0] for c in self.cities)

    def position(self, name: str) -> tuple[int, int]:
        for n, x, y in self.cities:
            if n == name:
                return (x, y)
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.cities)


def vicinity_cells(cities: CitySet, index: int, habitat: HabitatMap) -> set[tuple[int, int]]:
    """Habitable cells within Euclidean distance vicinity_radius of the
    city centre (closed disc, clipped to the habitable region)."""
    name, cx, cy = cities.cities[index]
    r = cities.vicinity_radius
    out = set()
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx * dx + dy * dy <= r * r:
                x, y = cx + dx, cy + dy
                if habitat.is_habitable(x, y):
                    out.add((x, y))
    return out


def _validate_cities(cities: CitySet, habitat: HabitatMap):
    seen = set()
    for name, x, y in cities.cities:
        if name in seen:
            raise ScenarioError(f"cities: duplicate city name {name!r}")
        seen.add(name)
        if not (0 <= x < habitat.width and 0 <= y < habitat.height):
            raise ScenarioError(f"cities: {name} at ({x}, {y}) is off-map")
        if habitat.cells[y, x] == OBSTACLE:
            raise ScenarioError(f"cities: {name} at ({x}, {y}) lies on an obstacle cell")
        if habitat.cells[y, x] != HABITABLE:
            raise ScenarioError(f"cities: {name} at ({x}, {y}) is not on a habitable cell")
    # Pairwise-disjoint vicinity discs: centre distance must exceed 2r.
    r = cities.vicinity_radius
    cs = cities.cities
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            d2 = (cs[i][1] - cs[j][1]) ** 2 + (cs[i][2] - cs[j][2]) ** 2
            if d2 <= (2 * r) ** 2:
                raise ScenarioError(
                    f"cities: vicinities of {cs[i][0]} and {cs[j][0]} overlap "
                    f"(distance {math.sqrt(d2):.1f} <= 2 x radius {r})"
                )


@dataclass(frozen=True)
class Scenario:
    """Fully validated experiment description."""

    habitat: HabitatMap
    cities: CitySet
    nutrient_level: str  # "low" | "high"
    params: ModelParams
    coverage: float
    runs: int
    steps: int
    snapshot_steps: tuple[int, ...]
    base_seed: int
    map_path: str = ""
    grey_mapping: dict = field(default_factory=lambda: dict(DEFAULT_GREY_MAPPING))

    @property
    def nutrient_value(self) -> float:
        return (
            self.params.nutrient_low
            if self.nutrient_level == "low"
            else self.params.nutrient_high
        )

    def city_vicinities(self) -> dict[str, set[tuple[int, int]]]:
        return {
            name: vicinity_cells(self.cities, i, self.habitat)
            for i, name in enumerate(self.cities.names)
        }

    def canonical_config(self) -> dict:
        return {
            "map": {
                "path": self.map_path,
                "grey_mapping": {int(k): v for k, v in self.grey_mapping.items()},
            },
            "cities": {
                "vicinity_radius": self.cities.vicinity_radius,
                "positions": [
                    {"name": n, "x": x, "y": y} for n, x, y in self.cities.cities
                ],
            },
            "params": asdict(self.params),
            "experiment": {
                "nutrient_level": self.nutrient_level,
                "coverage": self.coverage,
                "runs": self.runs,
                "steps": self.steps,
                "snapshot_steps": list(self.snapshot_steps),
                "base_seed": self.base_seed,
            },
        }

    def dump_config(self) -> str:
        return yaml.safe_dump(self.canonical_config(), sort_keys=False)


def default_vicinity_radius(habitat: HabitatMap) -> int:
    """3% of the map diagonal, rounded to whole cells."""
    diag = math.hypot(habitat.width, habitat.height)
    return max(1, round(0.03 * diag))


def _require(cond, msg):
    if not cond:
        raise ScenarioError(msg)


def load_scenario(config, base_dir=None) -> Scenario:
    """Load and validate a scenario from a YAML document.

    `config` is a path or a YAML string.  Relative map paths resolve
    against the config file's directory (or `base_dir`).
    """
    if isinstance(config, (str, Path)) and Path(str(config)).suffix in (".yaml", ".yml"):
        path = Path(config)
        doc = yaml.safe_load(path.read_text())
        base = path.parent if base_dir is None else Path(base_dir)
    else:
        doc = yaml.safe_load(config if isinstance(config, str) else Path(config).read_text())
        base = Path(base_dir) if base_dir is not None else Path(".")
    if not isinstance(doc, dict):
        raise ScenarioError("config: document is not a mapping")

    map_sec = doc.get("map")
    _require(isinstance(map_sec, dict) and "path" in map_sec, "map.path: required")
    grey_mapping = {
        int(k): str(v)
        for k, v in (map_sec.get("grey_mapping") or DEFAULT_GREY_MAPPING).items()
    }
    map_path = Path(map_sec["path"])
    if not map_path.is_absolute():
        map_path = base / map_path
    habitat = load_map(map_path, grey_mapping)

    cities_sec = doc.get("cities") or {}
    positions = cities_sec.get("positions")
    _require(positions, "cities.positions: at least one city required")
    radius = cities_sec.get("vicinity_radius")
    if radius is None:
        radius = default_vicinity_radius(habitat)
    radius = int(radius)
    _require(radius >= 0, "cities.vicinity_radius: must be >= 0")
    cities = CitySet(
        cities=tuple((str(c["name"]), int(c["x"]), int(c["y"])) for c in positions),
        vicinity_radius=radius,
    )
    _validate_cities(cities, habitat)

    params_sec = doc.get("params") or {}
    try:
        params = ModelParams(**params_sec)
    except TypeError as exc:
        raise ScenarioError(f"params: {exc}") from exc
    params.validate()

    exp = doc.get("experiment") or {}
    nutrient = str(exp.get("nutrient_level", "low")).lower()
    _require(nutrient in ("low", "high"), "experiment.nutrient_level: must be low or high")
    coverage = float(exp.get("coverage", 0.5))
    _require(0.0 < coverage <= 1.0, "experiment.coverage: must be in (0, 1]")
    runs = int(exp.get("runs", 1))
    _require(runs >= 1, "experiment.runs: must be >= 1")
    steps = int(exp.get("steps", 1))
    _require(steps >= 1, "experiment.steps: must be >= 1")
    snapshot_steps = tuple(int(s) for s in exp.get("snapshot_steps", []))
    _require(
        all(0 <= s <= steps for s in snapshot_steps),
        "experiment.snapshot_steps: must lie in [0, steps]",
    )
    base_seed = int(exp.get("base_seed", 0))
    _require(base_seed >= 0, "experiment.base_seed: must be >= 0")

    return Scenario(
        habitat=habitat,
        cities=cities,
        nutrient_level=nutrient,
        params=params,
        coverage=coverage,
        runs=runs,
        steps=steps,
        snapshot_steps=snapshot_steps,
        base_seed=base_seed,
        map_path=str(map_path),
        grey_mapping=grey_mapping,
    )
