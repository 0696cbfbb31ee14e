"""Stimulus definitions and their time-averaged acoustic pressure fields.

A focal spot is modelled as an isotropic Gaussian in pressure. Spatiotemporal
modulation (STM) sweeps one spot along a path at constant speed, so the
quasi-static field is the arc-length-weighted mean of spots along the path.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GeometryError, Grid, PressureField

#: Gaussian width giving a 13 mm diameter at 20 % of peak.
POINT_SIGMA_MM = 6.5 / math.sqrt(2.0 * math.log(5.0))
MAX_SEGMENT_MM = 0.5


class StimulusKind(str, enum.Enum):
    UM_POINT = "UM_POINT"
    STM_PATH = "STM_PATH"


@dataclass(frozen=True)
class FocalSpotModel:
    peak_pressure: float = 1.0  # kPa
    sigma: float = POINT_SIGMA_MM  # mm

    def __post_init__(self):
        if not self.peak_pressure > 0:
            raise ValueError(f"peak_pressure must be > 0, got {self.peak_pressure}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class ParametricPath:
    """Ordered focal-point vertices in mm.

    ``breaks`` lists segment indices ``i`` (vertex ``i`` -> ``i + 1``) that the
    focal point jumps across instead of traversing; crosses need two strokes.
    """

    vertices: np.ndarray
    closed: bool = False
    breaks: frozenset = frozenset()

    def __post_init__(self):
        verts = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) == 0:
            raise ValueError("path vertices must be a non-empty (N, 2) array")
        if not np.all(np.isfinite(verts)):
            raise ValueError("path vertices must be finite")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "breaks", frozenset(int(b) for b in self.breaks))
        if len(verts) > 1:
            steps = np.linalg.norm(np.diff(verts, axis=0), axis=1)
            if np.any(steps == 0):
                raise ValueError("consecutive path vertices must be distinct")
            if self.closed and np.array_equal(verts[0], verts[-1]):
                raise ValueError("closed path must not repeat its first vertex")
        if any(b < 0 or b >= len(verts) - 1 for b in self.breaks):
            raise ValueError("break index out of range")

    @property
    def is_point(self) -> bool:
        return len(self.vertices) == 1

    def segments(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        segs = [(v[i], v[i + 1]) for i in range(len(v) - 1) if i not in self.breaks]
        if self.closed and len(v) > 2:
            segs.append((v[-1], v[0]))
        return segs

    def translated(self, dx: float, dy: float) -> "ParametricPath":
        return ParametricPath(self.vertices + [dx, dy], self.closed, self.breaks)

    def rolled(self, k: int) -> "ParametricPath":
        """Same closed path starting at a different vertex."""
        if not self.closed:
            raise ValueError("only closed paths can be cyclically rotated")
        return ParametricPath(np.roll(self.vertices, -k, axis=0), True)


def path_length(path: ParametricPath) -> float:
    """Traversed length in mm; jumps across breaks do not count."""
    return float(sum(np.hypot(*(b - a)) for a, b in path.segments()))


def dwell_samples(path: ParametricPath, max_step: float = MAX_SEGMENT_MM):
    """Spot centres and dwell weights for a constant-speed sweep.

    Each traversed segment is split into equal pieces no longer than
    ``max_step``; a spot sits at each piece midpoint with weight equal to the
    piece length.
    """
    if path.is_point:
        return path.vertices.copy(), np.ones(1)
    centres, weights = [], []
    for a, b in path.segments():
        seg = b - a
        length = math.hypot(*seg)
        n = max(1, math.ceil(length / max_step - 1e-12))
        t = (np.arange(n) + 0.5) / n
        centres.append(a + t[:, None] * seg)
        weights.append(np.full(n, length / n))
    return np.vstack(centres), np.concatenate(weights)


@dataclass(frozen=True, eq=False)
class StimulusSpec:
    name: str
    kind: StimulusKind
    path: ParametricPath
    stm_frequency: float = 0.0  # Hz
    height: float = 20.0  # cm, metadata only
    amplitude_scale: float = 1.0
    size: float = 0.0  # mm, the characteristic dimension used to build the path

    def __post_init__(self):
        if not 0.0 <= self.amplitude_scale <= 1.0:
            raise ValueError(f"amplitude_scale must be in [0, 1], got {self.amplitude_scale}")
        if self.kind is StimulusKind.UM_POINT and not self.path.is_point:
            raise ValueError("UM_POINT stimulus needs a single-vertex path")
        if self.kind is StimulusKind.STM_PATH:
            if len(np.unique(self.path.vertices, axis=0)) < 2:
                raise ValueError("STM_PATH stimulus needs at least 2 distinct vertices")
            if self.stm_frequency <= 0:
                raise ValueError("STM_PATH stimulus needs a positive modulation frequency")

    def with_amplitude(self, amplitude_scale: float) -> "StimulusSpec":
        return StimulusSpec(self.name, self.kind, self.path, self.stm_frequency,
                            self.height, amplitude_scale, self.size)

    def translated(self, dx: float, dy: float) -> "StimulusSpec":
        return StimulusSpec(self.name, self.kind, self.path.translated(dx, dy),
                            self.stm_frequency, self.height, self.amplitude_scale, self.size)

    def to_config(self) -> dict[str, str]:
        return {
            "shape": self.name,
            "size_mm": repr(self.size),
            "stm_hz": repr(self.stm_frequency),
            "height_cm": repr(self.height),
            "amplitude": repr(self.amplitude_scale),
        }


# name -> (default size mm, stm Hz, height cm)
SHAPE_DEFAULTS = {
    "point": (0.0, 0.0, 20.0),
    "circle": (20.0, 70.0, 20.0),
    "line": (40.0, 100.0, 15.0),
    "triangle": (40.0, 100.0, 15.0),
    "square": (40.0, 100.0, 15.0),
    "small_cross": (40.0, 100.0, 15.0),
    "large_cross": (60.0, 100.0, 15.0),
    "rose": (60.0, 100.0, 15.0),
}
SHAPES = tuple(SHAPE_DEFAULTS)

CIRCLE_VERTICES = 360
ROSE_VERTICES = 720


def _regular_polygon(n, circumradius, phase):
    ang = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([circumradius * np.cos(ang), circumradius * np.sin(ang)])


def _build_path(name: str, size: float) -> ParametricPath:
    if name == "point":
        return ParametricPath([[0.0, 0.0]])
    if size <= 0:
        raise ValueError(f"{name}: size must be positive, got {size}")
    half = size / 2.0
    if name == "circle":
        return ParametricPath(_regular_polygon(CIRCLE_VERTICES, half, 0.0), closed=True)
    if name == "line":
        return ParametricPath([[-half, 0.0], [half, 0.0]])
    if name == "triangle":
        # equilateral, centroid at the origin, apex up
        return ParametricPath(_regular_polygon(3, size / math.sqrt(3.0), np.pi / 2), closed=True)
    if name == "square":
        return ParametricPath([[half, -half], [half, half], [-half, half], [-half, -half]], closed=True)
    if name in ("small_cross", "large_cross"):
        # two perpendicular strokes through the centre; the focal point jumps between them
        return ParametricPath([[-half, 0.0], [half, 0.0], [0.0, -half], [0.0, half]],
                              breaks=frozenset({1}))
    if name == "rose":
        # four-petal rhodonea r = R |cos 2phi|; petal tips on the axes, so extent = 2R
        phi = 2.0 * np.pi * np.arange(ROSE_VERTICES) / ROSE_VERTICES
        r = half * np.abs(np.cos(2.0 * phi))
        return ParametricPath(np.column_stack([r * np.cos(phi), r * np.sin(phi)]), closed=True)
    raise AssertionError(name)


def make_shape(name: str, size: float | None = None, stm_frequency: float | None = None,
               amplitude_scale: float = 1.0, height: float | None = None) -> StimulusSpec:
    """Canonical stimulus for one of :data:`SHAPES`.

    ``size`` is the circle diameter, the side length (line, triangle, square,
    crosses) or the longest extent (rose). Omitted parameters take the
    standard values: 20 mm circle at 70 Hz, 40 mm shapes at 100 Hz,
    60 mm large cross and rose.
    """
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key not in SHAPE_DEFAULTS:
        raise ValueError(f"unknown shape {name!r}; valid shapes: {', '.join(SHAPES)}")
    d_size, d_freq, d_height = SHAPE_DEFAULTS[key]
    size = d_size if size is None else float(size)
    height = d_height if height is None else float(height)
    path = _build_path(key, size)
    if key == "point":
        return StimulusSpec(key, StimulusKind.UM_POINT, path, 0.0, height, amplitude_scale, 0.0)
    freq = d_freq if stm_frequency is None else float(stm_frequency)
    return StimulusSpec(key, StimulusKind.STM_PATH, path, freq, height, amplitude_scale, size)


def time_averaged_field(spec: StimulusSpec, model: FocalSpotModel, grid: Grid) -> PressureField:
    """Quasi-static radiation pressure of ``spec`` sampled on ``grid`` (kPa)."""
    if grid.spacing > model.sigma / 2.0:
        raise GeometryError(
            f"grid spacing {grid.spacing} mm is coarser than sigma/2 = {model.sigma / 2.0:.4g} mm"
        )
    centres, weights = dwell_samples(spec.path)
    w = weights / weights.sum()
    inv = 1.0 / (2.0 * model.sigma ** 2)
    # the Gaussian is separable, so the spot sum is a (ny, K) @ (K, nx) product
    ex = np.exp(-((grid.x[None, :] - centres[:, 0:1]) ** 2) * inv)
    ey = np.exp(-((grid.y[None, :] - centres[:, 1:2]) ** 2) * inv)
    base = (ey * w[:, None]).T @ ex
    scale = spec.amplitude_scale * model.peak_pressure
    return PressureField(grid, scale * base)
