"""Systematic grid scans and their fusion into a normalized haptic map."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .gpr import GprModel, fit_gpr
from .grid import GeometryError, Grid, HapticMap, IndentationField
from .sensor import SensorModel, pin_lattice, read_sensor

DEFAULT_LENGTH_SCALE_MM = 5.0
MERGE_CELL_MM = 1.0
NOISE_ESTIMATE_READINGS = 8


@dataclass(frozen=True)
class ScanSpec:
    rows: int = 9
    cols: int = 9
    spacing: float = 10.0  # mm
    origin: tuple[float, float] = (-40.0, 40.0)  # world position of the top-left pose

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("scan needs at least one row and one column")
        if not self.spacing > 0:
            raise ValueError("scan spacing must be > 0")

    @classmethod
    def centered(cls, rows=9, cols=9, spacing=10.0, center=(0.0, 0.0)) -> "ScanSpec":
        ox = center[0] - spacing * (cols - 1) / 2.0
        oy = center[1] + spacing * (rows - 1) / 2.0
        return cls(rows, cols, spacing, (ox, oy))

    def poses(self) -> np.ndarray:
        """Row-major from the top-left: x grows along a row, rows step down in y."""
        r, c = np.divmod(np.arange(self.rows * self.cols), self.cols)
        return np.column_stack([self.origin[0] + c * self.spacing, self.origin[1] - r * self.spacing])


@dataclass(frozen=True, eq=False)
class ScanDataset:
    pose_index: np.ndarray  # (N,)
    pin_index: np.ndarray  # (N,)
    positions: np.ndarray  # (N, 2) world mm
    delta_area: np.ndarray  # (N,) mm^2

    def __post_init__(self):
        if not np.all(np.isfinite(self.delta_area)):
            raise ValueError("scan dataset contains non-finite cell-area changes")

    def __len__(self):
        return len(self.delta_area)

    @classmethod
    def empty(cls) -> "ScanDataset":
        return cls(np.zeros(0, int), np.zeros(0, int), np.zeros((0, 2)), np.zeros(0))

    @classmethod
    def from_reading(cls, pose_index: int, reading, pins=None) -> "ScanDataset":
        pins = pins or pin_lattice()
        n = len(pins)
        return cls(np.full(n, pose_index), np.arange(n), reading.world_positions(pins),
                   np.asarray(reading.delta_area, dtype=float))

    def extend(self, other: "ScanDataset") -> "ScanDataset":
        return ScanDataset(
            np.concatenate([self.pose_index, other.pose_index]),
            np.concatenate([self.pin_index, other.pin_index]),
            np.vstack([self.positions, other.positions]),
            np.concatenate([self.delta_area, other.delta_area]),
        )

    def within(self, center, half_width) -> "ScanDataset":
        d = np.abs(self.positions - np.asarray(center, dtype=float))
        keep = np.all(d <= half_width, axis=1)
        return ScanDataset(self.pose_index[keep], self.pin_index[keep], self.positions[keep],
                           self.delta_area[keep])

    def rows(self):
        for p, i, (x, y), v in zip(self.pose_index, self.pin_index, self.positions, self.delta_area):
            yield int(p), int(i), float(x), float(y), float(v)


def grid_scan(pipeline, spec: ScanSpec, seed=0) -> ScanDataset:
    """Visit every pose of ``spec`` in order and collect one reading per pose.

    Pose ``k`` draws its noise from child ``k`` of ``SeedSequence(seed)``.
    """
    poses = spec.poses()
    grid = pipeline.field_grid
    for k, pose in enumerate(poses):
        if not grid.contains_disc(pose, pipeline.pins.radius):
            raise GeometryError(
                f"scan pose {k} at ({pose[0]:g}, {pose[1]:g}) mm puts the sensor "
                f"{grid.overhang(pose, pipeline.pins.radius):.3g} mm outside the field"
            )
    seeds = np.random.SeedSequence(seed).spawn(len(poses))
    parts = [ScanDataset.from_reading(k, pipeline.read(pose, seeds[k]), pipeline.pins)
             for k, pose in enumerate(poses)]
    return functools.reduce(ScanDataset.extend, parts, ScanDataset.empty())


def merge_nearby(positions, values, cell: float = MERGE_CELL_MM):
    """Average samples that fall in the same ``cell``-sized square bin."""
    positions = np.asarray(positions, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return positions, values
    keys = np.floor(positions / cell).astype(np.int64)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    merged_pos = np.column_stack([
        np.bincount(inverse, weights=positions[:, 0]),
        np.bincount(inverse, weights=positions[:, 1]),
    ]) / counts[:, None]
    merged_val = np.bincount(inverse, weights=values) / counts
    return merged_pos, merged_val


@functools.lru_cache(maxsize=16)
def reading_noise(noise: float, frames: int, readings: int = NOISE_ESTIMATE_READINGS) -> float:
    """Std of one averaged reading's cell-area change with no stimulus (mm^2)."""
    if noise == 0:
        return 0.0
    pins = pin_lattice()
    zero = IndentationField(Grid.centered(2 * pins.radius + 4.0, 1.0), np.zeros((45, 45)))
    model = SensorModel(lever_gain=1.0, noise=noise, frames_per_reading=frames)
    seeds = np.random.SeedSequence(0).spawn(readings)
    deltas = [read_sensor(zero, (0.0, 0.0), model, s, pins).delta_area for s in seeds]
    return float(np.std(np.concatenate(deltas)))


#: Floor on the GP noise variance, relative to the signal variance.
MIN_NOISE_FRACTION = 1e-2


@dataclass(frozen=True)
class GprHyper:
    signal_var: float
    length_scale: float
    noise_var: float


def default_hyper(values, sensor: SensorModel | None = None,
                  length_scale: float = DEFAULT_LENGTH_SCALE_MM) -> GprHyper:
    """Fixed hyperparameters: data variance, 5 mm length scale, reading noise.

    The noise variance never drops below :data:`MIN_NOISE_FRACTION` of the
    signal variance, so noise-free readings do not produce a ringing
    interpolant.
    """
    sensor = sensor or SensorModel()
    var = float(np.var(values)) if len(values) else 0.0
    signal_var = var if var > 0 else 1.0
    noise_sd = reading_noise(sensor.noise, sensor.frames_per_reading)
    return GprHyper(signal_var, length_scale, max(noise_sd ** 2, MIN_NOISE_FRACTION * signal_var))


def fit_scan(data: ScanDataset, hyper: GprHyper | None = None, sensor: SensorModel | None = None,
             merge_cell: float | None = MERGE_CELL_MM) -> GprModel:
    """GPR over a scan after averaging near-duplicate sample positions."""
    if len(data) == 0:
        raise ValueError("cannot fit a map to an empty dataset")
    pos, val = data.positions, data.delta_area
    if merge_cell:
        pos, val = merge_nearby(pos, val, merge_cell)
    hyper = hyper or default_hyper(val, sensor)
    return fit_gpr(pos, val, hyper.signal_var, hyper.length_scale, hyper.noise_var)


def predict_map(model: GprModel, grid: Grid, with_variance: bool = False) -> HapticMap:
    """Posterior mean on ``grid``, clamped at zero and scaled so its max is 1."""
    mean, var = model.predict(grid.points(), return_var=True) if with_variance else (
        model.predict(grid.points()), None)
    mean = np.maximum(mean.reshape(grid.shape), 0.0)
    raw_max = float(mean.max())
    values = mean / raw_max if raw_max > 0 else np.zeros_like(mean)
    return HapticMap(grid, values, raw_max=raw_max,
                     variance=None if var is None else var.reshape(grid.shape))
