#!/usr/bin/env python3
"""Generate the Italy fixture shipped in slimeways/data/.

Produces:
  italy_habitat.pgm   200x260 habitat raster (255 habitable, 128 obstacle,
                      0 outside), calibrated so the habitable cell count is
                      close to 29578 (so 50% coverage gives 14789 particles).
  italy_scenario.yaml scenario config with the 11 city positions.
  roman_roads.json    reference road graph (hand transcription).

The city layout is an equirectangular projection of the cities' real
geographic coordinates, lightly calibrated so that the layout reproduces
the reference properties the package tests pin down (MST = RNG; the
Bononia-Roma chord crosses the MST drawing).  The coastline is a coarse
hand-drawn outline of peninsular Italy, inflated by a Euclidean-distance
buffer until the habitable count hits the target; the Apennine ridge is
an obstacle band along the spine with passes cleared where MST corridors
cross it.
"""

import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from slimeways.citymap import load_scenario, write_pgm
from slimeways.geometry import (
    PointSet,
    SimpleCityGraph,
    emst,
    gabriel_graph,
    rng_graph,
    straightline_planar,
)

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "slimeways" / "data"

WIDTH, HEIGHT = 200, 260
TARGET_HABITABLE = 29578

# --- projection -----------------------------------------------------------
LON_SCALE = 0.62          # east-west compression (narrow-peninsula layout)
PX_PER_DEG = 26.8
LAT_MAX = 47.0
LON_MIN = 6.8


def project(lon, lat):
    x = (lon - LON_MIN) * LON_SCALE * PX_PER_DEG
    y = (LAT_MAX - lat) * PX_PER_DEG
    return x, y


# Geographic city coordinates.  Florenzia carries a small eastward
# calibration nudge (see module docstring).
CITIES_GEO = [
    ("Genua", 8.93, 44.41),
    ("Placentia", 9.70, 45.05),
    ("Aquileia", 13.37, 45.77),
    ("Bononia", 11.34, 44.49),
    ("Florenzia", 11.35, 43.77),
    ("Ariminum", 12.57, 44.06),
    ("Roma", 12.48, 41.89),
    ("Capua", 14.21, 41.11),
    ("Venusia", 15.82, 40.96),
    ("Brundisium", 17.95, 40.63),
    ("Rhegium", 15.65, 38.11),
]

VICINITY_RADIUS = 6

# Coarse clockwise mainland outline (lon, lat).
OUTLINE = [
    (7.1, 45.6), (7.8, 45.9), (8.4, 46.2), (9.2, 46.3), (10.0, 46.5),
    (11.0, 46.9), (12.2, 46.9), (13.3, 46.5), (13.7, 46.0), (13.8, 45.6),
    (13.1, 45.7), (12.5, 45.5), (12.3, 45.2), (12.5, 44.8), (12.25, 44.4),
    (12.6, 44.0), (13.6, 43.55), (14.0, 42.9), (14.4, 42.5), (15.0, 42.0),
    (15.9, 41.9), (16.2, 41.95), (15.9, 41.5), (16.9, 41.1), (17.5, 40.8),
    (18.0, 40.65), (18.5, 40.15), (18.35, 39.8), (18.0, 39.95), (17.5, 40.3),
    (17.2, 40.4), (16.7, 40.2), (16.6, 39.9), (16.5, 39.1), (17.1, 38.9),
    (16.6, 38.4), (16.55, 38.0), (16.1, 37.9), (15.65, 38.0), (15.63, 38.6),
    (16.05, 38.95), (15.95, 39.35), (15.8, 39.9), (15.6, 40.07), (14.95, 40.45),
    (14.4, 40.6), (14.25, 40.83), (13.9, 41.2), (13.05, 41.25), (12.6, 41.45),
    (12.2, 41.75), (11.8, 42.05), (11.1, 42.4), (10.5, 42.95), (10.25, 43.55),
    (10.1, 43.95), (9.8, 44.05), (8.9, 44.38), (8.45, 44.28), (8.0, 43.9),
    (7.5, 43.78), (7.5, 44.1), (7.0, 44.6), (6.9, 45.1),
]

# Apennine ridge centreline (lon, lat); broken north of the
# Bononia-Florenzia corridor.
RIDGE = [
    (8.2, 44.65), (9.3, 44.55), (10.2, 44.3), (10.7, 44.0),
    (12.0, 43.2), (12.5, 42.7), (12.95, 42.3),
    (13.4, 41.95), (14.0, 41.6), (14.6, 41.3),
    (15.1, 40.75), (15.5, 40.3), (15.9, 40.0),
    (16.15, 39.5), (16.1, 39.0), (16.15, 38.5),
]
RIDGE_BREAKS = {3}  # no segment between RIDGE[3] and RIDGE[4]

RIDGE_HALF_WIDTH = 3.0
CITY_CLEAR_RADIUS = 9.0
CORRIDOR_CLEAR = 4.0

ROMAN_ROADS = {
    "metadata": {
        "description": (
            "Reference Roman road graph over the 11 cities; best-effort "
            "hand transcription of the consular road network "
            "(Aurelia/Postumia, Aemilia, Flaminia, Cassia, Appia, Popilia, "
            "Annia coastal link).  Analyses depending on this graph are "
            "fixture-dependent."
        ),
        "provenance": "transcription",
    },
    "nodes": [c[0] for c in CITIES_GEO],
    "edges": [
        ["Genua", "Placentia"],
        ["Genua", "Florenzia"],
        ["Placentia", "Bononia"],
        ["Placentia", "Aquileia"],
        ["Aquileia", "Ariminum"],
        ["Bononia", "Ariminum"],
        ["Bononia", "Florenzia"],
        ["Florenzia", "Roma"],
        ["Ariminum", "Roma"],
        ["Roma", "Capua"],
        ["Capua", "Venusia"],
        ["Venusia", "Brundisium"],
        ["Capua", "Rhegium"],
    ],
}

SCENARIO_TEMPLATE = """\
# 11-city Italy scenario: low nutrient, 20 runs of 6192 scheduler steps.
map:
  path: italy_habitat.pgm
  grey_mapping:
    255: habitable
    128: obstacle
    0: outside
cities:
  vicinity_radius: {radius}
  positions:
{positions}
params:
  sensor_angle: 22.5
experiment:
  nutrient_level: low
  coverage: 0.5
  runs: 20
  steps: 6192
  snapshot_steps: [10, 91, 272, 576, 1924, 6192]
  base_seed: 77
"""


def polygon_mask(poly_px):
    """Point-in-polygon rasterization via matplotlib path."""
    from matplotlib.path import Path as MplPath

    ys, xs = np.mgrid[0:HEIGHT, 0:WIDTH]
    pts = np.column_stack([xs.ravel() + 0.5, ys.ravel() + 0.5])
    path = MplPath(poly_px)
    return path.contains_points(pts).reshape(HEIGHT, WIDTH)


def seg_distance_field(segments):
    """Min distance from every cell centre to a list of px segments."""
    ys, xs = np.mgrid[0:HEIGHT, 0:WIDTH]
    px = xs + 0.0
    py = ys + 0.0
    best = np.full((HEIGHT, WIDTH), np.inf)
    for (x1, y1), (x2, y2) in segments:
        dx, dy = x2 - x1, y2 - y1
        ll = dx * dx + dy * dy
        if ll == 0:
            d = np.hypot(px - x1, py - y1)
        else:
            t = np.clip(((px - x1) * dx + (py - y1) * dy) / ll, 0.0, 1.0)
            d = np.hypot(px - (x1 + t * dx), py - (y1 + t * dy))
        best = np.minimum(best, d)
    return best


def build():
    cities_px = [(n,) + tuple(int(round(v)) for v in project(lon, lat))
                 for n, lon, lat in CITIES_GEO]
    pset = PointSet.from_pairs([(n, x, y) for n, x, y in cities_px])

    # --- geometry calibration checks -------------------------------------
    mst = emst(pset)
    rng_g = rng_graph(pset)
    gg = gabriel_graph(pset)
    assert mst.edges == rng_g.edges, (
        "MST != RNG on fixture:", sorted(mst.edges ^ rng_g.edges))
    assert mst.edges <= gg.edges
    chord = SimpleCityGraph.build(pset.ids, set(mst.edges) | {("Bononia", "Roma")})
    planar, crossings = straightline_planar(chord, pset)
    assert not planar, "Bononia-Roma chord does not cross the MST drawing"
    print("MST edges:", sorted(mst.edges))
    print("chord crossings:", crossings)

    # vicinity disjointness
    for i in range(len(cities_px)):
        for j in range(i + 1, len(cities_px)):
            d2 = ((cities_px[i][1] - cities_px[j][1]) ** 2
                  + (cities_px[i][2] - cities_px[j][2]) ** 2)
            assert d2 > (2 * VICINITY_RADIUS) ** 2, (
                cities_px[i][0], cities_px[j][0], d2)

    # --- raster ------------------------------------------------------------
    poly_px = [project(lon, lat) for lon, lat in OUTLINE]
    inside0 = polygon_mask(poly_px)

    ridge_segs = []
    for i in range(len(RIDGE) - 1):
        if i in RIDGE_BREAKS:
            continue
        ridge_segs.append((project(*RIDGE[i]), project(*RIDGE[i + 1])))
    ridge_dist = seg_distance_field(ridge_segs)

    coords = {n: (x, y) for n, x, y in cities_px}
    corridor_segs = [(coords[a], coords[b]) for a, b in mst.edges]
    corridor_dist = seg_distance_field(corridor_segs)
    city_dist = seg_distance_field([((x, y), (x, y)) for _, x, y in cities_px])

    # Inflate the coastline until the habitable count hits the target.
    dist_out = ndimage.distance_transform_edt(~inside0)

    def habitable_for(buffer_r):
        inside = inside0 | (dist_out <= buffer_r)
        obstacle = (
            inside
            & (ridge_dist <= RIDGE_HALF_WIDTH)
            & (city_dist > CITY_CLEAR_RADIUS)
            & (corridor_dist > CORRIDOR_CLEAR)
        )
        habitable = inside & ~obstacle
        # force each city's core onto habitable ground
        habitable |= city_dist <= 3.0
        return habitable, obstacle & ~(city_dist <= 3.0)

    lo, hi = 0.0, 60.0
    for _ in range(40):
        mid = (lo + hi) / 2
        hab, _ = habitable_for(mid)
        if hab.sum() < TARGET_HABITABLE:
            lo = mid
        else:
            hi = mid
    habitable, obstacle = habitable_for(hi)
    count = int(habitable.sum())
    print(f"buffer radius {hi:.2f} -> habitable {count} "
          f"(target {TARGET_HABITABLE}, {100 * count / TARGET_HABITABLE:.1f}%)")
    assert abs(count - TARGET_HABITABLE) <= 0.05 * TARGET_HABITABLE

    raster = np.zeros((HEIGHT, WIDTH), dtype=np.uint8)
    raster[obstacle] = 128
    raster[habitable] = 255

    DATA_DIR.mkdir(parents=True, exist_ok=True)
    write_pgm(DATA_DIR / "italy_habitat.pgm", raster)

    positions = "\n".join(
        f"    - {{name: {n}, x: {x}, y: {y}}}" for n, x, y in cities_px
    )
    (DATA_DIR / "italy_scenario.yaml").write_text(
        SCENARIO_TEMPLATE.format(radius=VICINITY_RADIUS, positions=positions)
    )

    import json
    (DATA_DIR / "roman_roads.json").write_text(json.dumps(ROMAN_ROADS, indent=2) + "\n")

    # final validation through the real loaders
    scenario = load_scenario(DATA_DIR / "italy_scenario.yaml")
    assert scenario.habitat.habitable_count == count
    print("scenario loads cleanly;", len(scenario.cities), "cities")

    road = SimpleCityGraph.build(
        ROMAN_ROADS["nodes"], [tuple(e) for e in ROMAN_ROADS["edges"]])
    planar, crossings = straightline_planar(road, pset)
    assert planar, f"road graph not planar in straight-line embedding: {crossings}"
    print("road graph planar; edges:", len(road.edges))


if __name__ == "__main__":
    build()
