"""Virtual optical pin sensor: a 127-pin hexagonal lattice on a 40 mm disc.

Pins act as levers, so each marker shifts by ``u = -lever_gain * grad(z)``,
away from indentation maxima. The per-pin signal is the change in area of
the marker's disc-bounded Voronoi cell relative to rest.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .grid import GeometryError, IndentationField
from .voronoi import bounded_cell_areas

DISC_RADIUS_MM = 20.0
PIN_RINGS = 6
PIN_PITCH_MM = 3.0
#: Lever gain (mm of marker shift per unit indentation slope) for the default
#: skin compliance. Gives the unmodulated focal point a 3.77 mm^2 map peak;
#: regenerate with :func:`hapticmap.pipeline.calibrate_lever_gain`.
DEFAULT_LEVER_GAIN = 15737.6
DEFAULT_MARKER_NOISE_MM = 0.05
FRAMES_PER_READING = 30


@dataclass(frozen=True, eq=False)
class PinArray:
    rest: np.ndarray  # (127, 2) mm, sensor frame
    ring: np.ndarray  # ring index per pin, 0 = centre
    radius: float = DISC_RADIUS_MM

    def __len__(self):
        return len(self.rest)

    @functools.cached_property
    def rest_areas(self) -> np.ndarray:
        return bounded_cell_areas(self.rest, self.radius)

    def rotation_permutation(self, degrees: float) -> np.ndarray:
        """``perm[i]`` is the pin that pin ``i`` lands on after rotating by ``degrees``."""
        t = math.radians(degrees)
        rot = self.rest @ np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
        dist = np.linalg.norm(rot[:, None, :] - self.rest[None, :, :], axis=2)
        perm = dist.argmin(axis=1)
        if dist[np.arange(len(perm)), perm].max() > 1e-9:
            raise ValueError(f"lattice is not symmetric under a {degrees} degree rotation")
        return perm


@functools.lru_cache(maxsize=None)
def pin_lattice(rings: int = PIN_RINGS, pitch: float = PIN_PITCH_MM,
                radius: float = DISC_RADIUS_MM) -> PinArray:
    """Centred hexagonal lattice, ordered by ring then by polar angle."""
    pts, ring = [], []
    for q in range(-rings, rings + 1):
        for r in range(-rings, rings + 1):
            k = max(abs(q), abs(r), abs(q + r))
            if k <= rings:
                pts.append((pitch * (q + r / 2.0), pitch * r * math.sqrt(3.0) / 2.0))
                ring.append(k)
    pts = np.array(pts)
    ring = np.array(ring)
    ang = np.round(np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi), 12)
    order = np.lexsort((ang, ring))
    pts, ring = pts[order], ring[order]
    pts[np.abs(pts) < 1e-12] = 0.0
    if np.hypot(pts[:, 0], pts[:, 1]).max() >= radius:
        raise GeometryError("pin lattice does not fit inside the sensor disc")
    return PinArray(pts, ring, radius)


@dataclass(frozen=True)
class SensorModel:
    lever_gain: float = DEFAULT_LEVER_GAIN
    noise: float = DEFAULT_MARKER_NOISE_MM  # marker jitter std, mm
    frames_per_reading: int = FRAMES_PER_READING

    def __post_init__(self):
        if not self.lever_gain > 0:
            raise ValueError(f"lever_gain must be > 0, got {self.lever_gain}")
        if self.noise < 0:
            raise ValueError(f"noise must be >= 0, got {self.noise}")
        if self.frames_per_reading < 1:
            raise ValueError("frames_per_reading must be >= 1")


@dataclass(frozen=True, eq=False)
class TactileFrame:
    rest: np.ndarray
    deformed: np.ndarray
    pose: tuple[float, float]


@dataclass(frozen=True, eq=False)
class VoronoiFeatures:
    delta_area: np.ndarray  # mm^2 per pin
    pose: tuple[float, float]

    def world_positions(self, pins: PinArray | None = None) -> np.ndarray:
        pins = pins or pin_lattice()
        return pins.rest + np.asarray(self.pose)


class GradientSampler:
    """Bilinear lookup of the indentation slope; built once per field."""

    def __init__(self, z: IndentationField):
        self.field = z
        gy, gx = np.gradient(z.values, z.grid.spacing)
        self._gx = IndentationField(z.grid, gx)
        self._gy = IndentationField(z.grid, gy)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.column_stack([self._gx.sample(points), self._gy.sample(points)])


def _check_footprint(z: IndentationField, pose, radius):
    if not z.grid.contains_disc(pose, radius):
        over = z.grid.overhang(pose, radius)
        raise GeometryError(
            f"sensor at pose ({pose[0]:g}, {pose[1]:g}) mm overhangs the field by {over:.3g} mm"
        )


def _clamp_to_disc(p: np.ndarray, radius: float) -> np.ndarray:
    r = np.hypot(p[:, 0], p[:, 1])
    scale = np.where(r > radius, radius / np.where(r > 0, r, 1.0), 1.0)
    return p * scale[:, None]


def mean_displacement(z, pose, model: SensorModel, pins: PinArray | None = None,
                      gradient: GradientSampler | None = None) -> np.ndarray:
    """Noise-free marker shift ``-lever_gain * grad z`` at each pin (mm)."""
    pins = pins or pin_lattice()
    pose = (float(pose[0]), float(pose[1]))
    _check_footprint(z, pose, pins.radius)
    gradient = gradient or GradientSampler(z)
    return -model.lever_gain * gradient(pins.rest + np.asarray(pose))


def _rngs(seed, count):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(count)]


def sample_markers(z: IndentationField, pose, model: SensorModel, seed=0,
                   pins: PinArray | None = None) -> TactileFrame:
    """One camera frame: displaced, jittered and disc-clamped marker positions."""
    pins = pins or pin_lattice()
    shift = mean_displacement(z, pose, model, pins)
    deformed = pins.rest + shift
    if model.noise > 0:
        deformed = deformed + _rngs(seed, 1)[0].normal(0.0, model.noise, deformed.shape)
    pose = (float(pose[0]), float(pose[1]))
    return TactileFrame(pins.rest, _clamp_to_disc(deformed, pins.radius), pose)


def voronoi_features(frame: TactileFrame, pins: PinArray | None = None) -> VoronoiFeatures:
    pins = pins or pin_lattice()
    if frame.rest is pins.rest or np.array_equal(frame.rest, pins.rest):
        rest_areas = pins.rest_areas
    else:
        rest_areas = bounded_cell_areas(frame.rest, pins.radius)
    delta = bounded_cell_areas(frame.deformed, pins.radius) - rest_areas
    return VoronoiFeatures(delta, frame.pose)


def read_sensor(z: IndentationField, pose, model: SensorModel, seed=0,
                pins: PinArray | None = None,
                gradient: GradientSampler | None = None) -> VoronoiFeatures:
    """Mean cell-area change over ``frames_per_reading`` independently jittered frames.

    ``seed`` may be an int (64-bit unsigned) or a :class:`numpy.random.SeedSequence`;
    frame ``k`` draws from the ``k``-th spawned child, so the result does not
    depend on evaluation order.
    """
    pins = pins or pin_lattice()
    pose = (float(pose[0]), float(pose[1]))
    base = pins.rest + mean_displacement(z, pose, model, pins, gradient)
    if model.noise == 0:
        frame = TactileFrame(pins.rest, _clamp_to_disc(base, pins.radius), pose)
        return voronoi_features(frame, pins)
    total = np.zeros(len(pins))
    for rng in _rngs(seed, model.frames_per_reading):
        jittered = _clamp_to_disc(base + rng.normal(0.0, model.noise, base.shape), pins.radius)
        total += bounded_cell_areas(jittered, pins.radius)
    return VoronoiFeatures(total / model.frames_per_reading - pins.rest_areas, pose)
