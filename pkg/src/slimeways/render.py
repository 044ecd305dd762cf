"""Figure-style rendering: snapshot composites and graph overlays."""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from .citymap import HABITABLE, OBSTACLE, Scenario

_BG = {0: (20, 40, 80), HABITABLE: (235, 230, 215), OBSTACLE: (150, 140, 130)}


def habitat_image(scenario: Scenario, scale: int = 3) -> Image.Image:
    cells = scenario.habitat.cells
    rgb = np.zeros(cells.shape + (3,), dtype=np.uint8)
    for code, colour in _BG.items():
        rgb[cells == code] = colour
    img = Image.fromarray(rgb, "RGB")
    return img.resize((cells.shape[1] * scale, cells.shape[0] * scale), Image.NEAREST)


def _draw_cities(draw: ImageDraw.ImageDraw, scenario: Scenario, scale: int):
    r = max(2, scenario.cities.vicinity_radius * scale // 2)
    for name, x, y in scenario.cities.cities:
        cx, cy = x * scale, y * scale
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], outline=(180, 30, 30), width=2)
        draw.text((cx + r + 2, cy - r), name, fill=(60, 20, 20))


def snapshot_image(scenario: Scenario, occupancy: np.ndarray,
                   chemo: np.ndarray | None = None, scale: int = 3) -> Image.Image:
    img = habitat_image(scenario, scale)
    overlay = np.array(img)
    if chemo is not None and chemo.max() > 0:
        level = (chemo / chemo.max() * 255).astype(np.uint8)
        level = np.kron(level, np.ones((scale, scale), dtype=np.uint8))
        tint = overlay.copy()
        tint[..., 0] = np.maximum(tint[..., 0] // 2, level)
        tint[..., 1] = tint[..., 1] // 2
        tint[..., 2] = tint[..., 2] // 2
        mask = level > 8
        overlay[mask] = tint[mask]
    occ = np.kron(occupancy.astype(bool), np.ones((scale, scale), dtype=bool))
    overlay[occ] = (40, 40, 30)
    img = Image.fromarray(overlay, "RGB")
    _draw_cities(ImageDraw.Draw(img), scenario, scale)
    return img


def graph_image(scenario: Scenario, graph, scale: int = 3,
                edge_colour=(180, 30, 30)) -> Image.Image:
    """Straight-line drawing of a city graph over the habitat map."""
    img = habitat_image(scenario, scale)
    draw = ImageDraw.Draw(img)
    pos = {n: (x * scale, y * scale) for n, x, y in scenario.cities.cities}
    for a, b in sorted(graph.edges):
        draw.line([pos[a], pos[b]], fill=edge_colour, width=2)
    _draw_cities(draw, scenario, scale)
    return img
