import numpy as np
import pytest

from slimeways.citymap import CitySet, load_map
from slimeways.netextract import extract_from_field, extract_with_dilation

from conftest import open_ground


class FieldState:
    """Minimal stand-in exposing the occupancy lattice of a SimState."""

    def __init__(self, occupied):
        self.occupancy = occupied.astype(np.int32)


def habitat40():
    return load_map(open_ground(40, 40))


def corridor_cities():
    # A and B joined by a straight tube that threads C's vicinity
    return CitySet(cities=(("A", 5, 20), ("C", 20, 20), ("B", 35, 20)),
                   vicinity_radius=3)


def straight_corridor():
    occ = np.zeros((40, 40), dtype=bool)
    occ[20, 2:39] = True
    return occ


def test_corridor_through_third_vicinity_splits_edge():
    g = extract_from_field(straight_corridor(), corridor_cities(), habitat40())
    assert g.edges == {("A", "C"), ("B", "C")}
    assert g.nodes == {"A", "B", "C"}


def test_bypass_outside_third_vicinity_restores_edge():
    occ = straight_corridor()
    occ[10, 5:36] = True   # detour well above C's vicinity
    occ[10:21, 5] = True
    occ[10:21, 35] = True
    g = extract_from_field(occ, corridor_cities(), habitat40())
    assert g.edges == {("A", "C"), ("B", "C"), ("A", "B")}


def test_gap_breaks_edge_and_dilation_heals_it():
    occ = np.zeros((40, 40), dtype=bool)
    occ[20, 2:18] = True
    occ[20, 19:39] = True  # one-cell gap at x = 18
    cities = CitySet(cities=(("A", 5, 20), ("B", 35, 20)), vicinity_radius=3)
    habitat = habitat40()
    assert extract_from_field(occ, cities, habitat).edges == set()
    healed = extract_with_dilation(FieldState(occ), cities, habitat, dilation=1)
    assert healed.edges == {("A", "B")}


def test_diagonal_contact_counts_as_connected():
    occ = np.zeros((40, 40), dtype=bool)
    for i in range(33):  # strict diagonal staircase, 8-connected only
        occ[4 + i, 4 + i] = True
    cities = CitySet(cities=(("A", 5, 5), ("B", 35, 35)), vicinity_radius=2)
    g = extract_from_field(occ, cities, habitat40())
    assert g.edges == {("A", "B")}


def test_empty_field_yields_isolated_nodes():
    g = extract_from_field(np.zeros((40, 40), dtype=bool),
                           corridor_cities(), habitat40())
    assert g.edges == set()
    assert g.nodes == {"A", "B", "C"}


def test_occupancy_outside_habitable_is_ignored():
    raster = open_ground(40, 40)
    raster[:, 19:22] = 128  # wall cutting the corridor
    habitat = load_map(raster)
    cities = CitySet(cities=(("A", 5, 20), ("B", 35, 20)), vicinity_radius=3)
    occ = np.zeros((40, 40), dtype=bool)
    occ[20, 2:39] = True   # occupies wall cells too; they must not carry
    g = extract_from_field(occ, cities, habitat)
    assert g.edges == set()


def test_dilation_only_adds_edges():
    rng = np.random.default_rng(4)
    habitat = habitat40()
    cities = corridor_cities()
    for _ in range(10):
        occ = rng.random((40, 40)) < 0.35
        prev = extract_with_dilation(FieldState(occ), cities, habitat, 0).edges
        for d in (1, 2):
            cur = extract_with_dilation(FieldState(occ), cities, habitat, d).edges
            assert prev <= cur
            prev = cur


def test_negative_dilation_rejected():
    with pytest.raises(ValueError):
        extract_with_dilation(FieldState(np.zeros((40, 40), dtype=bool)),
                              corridor_cities(), habitat40(), -1)


def test_edges_are_canonically_ordered():
    g = extract_from_field(straight_corridor(), corridor_cities(), habitat40())
    for a, b in g.edges:
        assert a < b
