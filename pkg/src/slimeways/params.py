"""Model parameters for the virtual plasmodium.

Defaults follow the published model description where values are given
(deposit, damping, nutrient levels, growth/shrink windows and bounds,
adaptation interval).  The sensing geometry (sensor offset/angle,
rotation angle) is unpublished; the defaults here are the usual
network-formation regime for this family of particle models and are
fully configurable.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    sensor_offset: float = 9.0       # SO, cells
    sensor_angle: float = 45.0       # SA, degrees
    rotation_angle: float = 45.0     # RA, degrees
    deposit: float = 5.0             # chemo units per successful move
    damping: float = 0.9             # multiplier per diffusion step
    nutrient_low: float = 2.55
    nutrient_high: float = 255.0
    growth_window: int = 9           # side of the growth census neighbourhood
    growth_min: int = 1
    growth_max: int = 10
    shrink_window: int = 5           # side of the overcrowding neighbourhood
    shrink_max: int = 24
    shrink_count_includes_self: bool = True
    adaptation_interval: int = 2     # scheduler steps between adaptation passes

    def validate(self):
        from .citymap import ScenarioError

        checks = [
            (self.sensor_offset >= 1, "params.sensor_offset: must be >= 1"),
            (0 < self.sensor_angle < 180, "params.sensor_angle: must be in (0, 180)"),
            (0 < self.rotation_angle < 180, "params.rotation_angle: must be in (0, 180)"),
            (self.deposit > 0, "params.deposit: must be > 0"),
            (0 < self.damping <= 1, "params.damping: must be in (0, 1]"),
            (self.nutrient_low > 0, "params.nutrient_low: must be > 0"),
            (self.nutrient_high > 0, "params.nutrient_high: must be > 0"),
            (self.growth_window % 2 == 1, "params.growth_window: must be odd"),
            (self.shrink_window % 2 == 1, "params.shrink_window: must be odd"),
            (0 <= self.growth_min <= self.growth_max, "params.growth_min/max: bad range"),
            (self.shrink_max >= 0, "params.shrink_max: must be >= 0"),
            (self.adaptation_interval >= 1, "params.adaptation_interval: must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ScenarioError(msg)
