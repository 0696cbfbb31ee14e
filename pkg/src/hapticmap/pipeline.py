"""End-to-end simulated stimulus: pressure, indentation and sensor readings."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .acoustics import FocalSpotModel, StimulusSpec, make_shape, time_averaged_field
from .grid import Grid, IndentationField, PressureField
from .mapping import ScanSpec, fit_scan, grid_scan, predict_map
from .sensor import (DEFAULT_LEVER_GAIN, DEFAULT_MARKER_NOISE_MM, DISC_RADIUS_MM, GradientSampler, PinArray, SensorModel,
                     VoronoiFeatures, pin_lattice, read_sensor)
from .skin import SkinModel, indent

#: Peak cell-area change of the unmodulated focal point on the tactile robot.
POINT_PEAK_DELTA_AREA = 3.77  # mm^2
FIELD_SPACING_MM = 0.5
FIELD_MARGIN_MM = 2.0
#: Map window used for the point/circle comparisons (40 mm square, 0.5 mm pixels).
COMPARISON_MAP_GRID = Grid.centered(40.0, 0.5)


@dataclass
class StimulusPipeline:
    """Pressure and indentation for one stimulus, computed once and then probed."""

    stimulus: StimulusSpec
    field_grid: Grid
    focal: FocalSpotModel = field(default_factory=FocalSpotModel)
    skin: SkinModel = field(default_factory=SkinModel)
    sensor: SensorModel = field(default_factory=SensorModel)
    pins: PinArray = field(default_factory=pin_lattice)

    def __post_init__(self):
        self.pressure: PressureField = time_averaged_field(self.stimulus, self.focal, self.field_grid)
        self.indentation: IndentationField = indent(self.pressure, self.skin)
        self._gradient = GradientSampler(self.indentation)

    @classmethod
    def covering(cls, stimulus: StimulusSpec, poses, spacing=FIELD_SPACING_MM, **models):
        """Pipeline whose field just covers the sensor disc at every pose."""
        poses = np.atleast_2d(np.asarray(poses, dtype=float))
        reach = DISC_RADIUS_MM + FIELD_MARGIN_MM
        lo = np.floor((poses.min(axis=0) - reach) / spacing) * spacing
        hi = np.ceil((poses.max(axis=0) + reach) / spacing) * spacing
        grid = Grid.from_extent(lo[0], hi[0], lo[1], hi[1], spacing)
        return cls(stimulus, grid, **models)

    def read(self, pose, seed=0) -> VoronoiFeatures:
        return read_sensor(self.indentation, pose, self.sensor, seed, self.pins, self._gradient)

    def with_sensor(self, sensor: SensorModel) -> "StimulusPipeline":
        """Same fields, different sensor; skips recomputing pressure and indentation."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.sensor = sensor
        return clone


def point_map_peak(lever_gain: float, seed=0, focal: FocalSpotModel | None = None,
                   skin: SkinModel | None = None, noise: float = DEFAULT_MARKER_NOISE_MM) -> float:
    """Raw peak (mm^2) of the fused map of a standard 9x9 scan over the point stimulus."""
    scan = ScanSpec.centered()
    sensor = SensorModel(lever_gain=lever_gain, noise=noise)
    pipe = StimulusPipeline.covering(make_shape("point"), scan.poses(), focal=focal or FocalSpotModel(),
                                     skin=skin or SkinModel(), sensor=sensor)
    data = grid_scan(pipe, scan, seed)
    return predict_map(fit_scan(data, sensor=sensor), COMPARISON_MAP_GRID).raw_max


def calibrate_lever_gain(target: float = POINT_PEAK_DELTA_AREA, start: float = DEFAULT_LEVER_GAIN,
                         rtol: float = 1e-4, max_iter: int = 12, **kwargs) -> float:
    """Lever gain whose point-stimulus map peaks at ``target`` mm^2.

    Secant iteration on :func:`point_map_peak`; each step runs a full scan,
    so expect tens of seconds.
    """
    g0, g1 = start, start * 1.05
    f0 = point_map_peak(g0, **kwargs) - target
    for _ in range(max_iter):
        f1 = point_map_peak(g1, **kwargs) - target
        if abs(f1) <= rtol * target:
            return g1
        if f1 == f0:
            break
        g0, g1, f0 = g1, g1 - f1 * (g1 - g0) / (f1 - f0), f1
    raise RuntimeError(f"lever-gain calibration did not converge (last gain {g1:g})")
