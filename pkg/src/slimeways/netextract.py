"""City connectivity extraction from a final simulation state.

An edge (a, b) exists when some 8-connected path of occupied cells runs
from a's vicinity to b's vicinity without entering the vicinity of any
third city.  Paths may start and end inside the two endpoint vicinities;
every other city's vicinity disc is carved out of the traversable set.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .citymap import CitySet, HabitatMap, vicinity_cells
from .geometry import SimpleCityGraph

_EIGHT = np.ones((3, 3), dtype=bool)


def occupancy_field(state) -> np.ndarray:
    """Boolean particle-presence lattice from a SimState."""
    return state.occupancy != 0


def _vicinity_masks(cities: CitySet, habitat: HabitatMap) -> list[np.ndarray]:
    masks = []
    for i in range(len(cities)):
        m = np.zeros(habitat.cells.shape, dtype=bool)
        for x, y in vicinity_cells(cities, i, habitat):
            m[y, x] = True
        masks.append(m)
    return masks


def extract_from_field(occupied: np.ndarray, cities: CitySet,
                       habitat: HabitatMap) -> SimpleCityGraph:
    """Vicinity-rule edge extraction from a boolean occupancy field."""
    names = cities.names
    masks = _vicinity_masks(cities, habitat)
    occupied = occupied & (habitat.cells == 1)
    edges = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            blocked = np.zeros_like(occupied)
            for k in range(len(names)):
                if k != i and k != j:
                    blocked |= masks[k]
            traversable = occupied & ~blocked
            labels, _ = ndimage.label(traversable, structure=_EIGHT)
            la = np.unique(labels[masks[i] & traversable])
            lb = np.unique(labels[masks[j] & traversable])
            la = la[la != 0]
            lb = lb[lb != 0]
            if np.intersect1d(la, lb).size:
                edges.append((names[i], names[j]))
    return SimpleCityGraph.build(names, edges)


def extract_edges(state, cities: CitySet, habitat: HabitatMap) -> SimpleCityGraph:
    return extract_from_field(occupancy_field(state), cities, habitat)


def extract_with_dilation(state, cities: CitySet, habitat: HabitatMap,
                          dilation: int = 0) -> SimpleCityGraph:
    """Like extract_edges, after dilating the occupancy field by
    `dilation` cells (square structuring element, clipped to habitable
    cells).  Dilation bridges the transient one-cell gaps that particle
    motion leaves in otherwise continuous tubes."""
    if dilation < 0:
        raise ValueError("dilation must be >= 0")
    occ = occupancy_field(state)
    if dilation:
        occ = ndimage.binary_dilation(occ, structure=_EIGHT, iterations=dilation)
    return extract_from_field(occ, cities, habitat)
