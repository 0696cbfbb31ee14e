"""Autonomous contour following: sense, perceive with image moments, act on a grid.

Perception fits a GP to the cell-area changes near the sensor, keeps the
pixels above a fraction of the local maximum, and reads the stimulus
centroid and orientation off the image moments of what remains. Action
selection either chases a distant centroid or continues along the local
orientation, then snaps the heading to one of eight grid moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, HapticMap
from .mapping import (DEFAULT_LENGTH_SCALE_MM, ScanDataset, default_hyper, fit_scan, merge_nearby,
                      predict_map, reading_noise)
from .gpr import fit_gpr
from .sensor import SensorModel

CHASE_DISTANCE_MM = 5.0
DEFAULT_THRESHOLD = 0.3
DEFAULT_WINDOW_MM = 30.0
PERCEPT_SPACING_MM = 1.0
#: Radius around the sensor centre whose readings are trusted for perception.
PERCEPT_FOOTPRINT_MM = 10.0
#: Local maxima below this many reading-noise deviations count as no stimulus.
DETECTION_SNR = 3.0


class LostStimulus(RuntimeError):
    """The sensor no longer feels anything above threshold."""


@dataclass(frozen=True)
class Percept:
    centroid: tuple[float, float] | None
    theta: float | None  # degrees in [-90, 90)
    mass: float
    above_threshold: bool
    peak: float = 0.0


@dataclass(frozen=True)
class ActionSet:
    step: float = 10.0  # mm

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("action grid step must be > 0")

    @property
    def moves(self) -> list[tuple[float, float]]:
        a = self.step
        return [(a, 0.0), (a, a), (0.0, a), (-a, a), (-a, 0.0), (-a, -a), (0.0, -a), (a, -a)]


def move_angle(move) -> float:
    """Heading of a move in degrees, in [0, 360)."""
    return math.degrees(math.atan2(move[1], move[0])) % 360.0


def angle_diff(a: float, b: float) -> float:
    """Smallest absolute difference between two headings, in [0, 180]."""
    d = (a - b) % 360.0
    return min(d, 360.0 - d)


def image_moments(values: np.ndarray, grid: Grid):
    """Raw mass, centroid and orientation (degrees, [-90, 90)) of an intensity image."""
    xx, yy = grid.mesh()
    m00 = values.sum()
    if not m00 > 0:
        return 0.0, None, None
    xbar = (values * xx).sum() / m00
    ybar = (values * yy).sum() / m00
    dx, dy = xx - xbar, yy - ybar
    mu20 = (values * dx * dx).sum()
    mu02 = (values * dy * dy).sum()
    mu11 = (values * dx * dy).sum()
    theta = 0.5 * math.degrees(math.atan2(2.0 * mu11, mu20 - mu02))
    if theta >= 90.0:
        theta -= 180.0
    return float(m00), (float(xbar), float(ybar)), theta


def perceive(samples: ScanDataset, center, window: float = DEFAULT_WINDOW_MM,
             threshold: float = DEFAULT_THRESHOLD, sensor: SensorModel | None = None,
             length_scale: float = DEFAULT_LENGTH_SCALE_MM, detect_floor: float | None = None,
             footprint: float | None = PERCEPT_FOOTPRINT_MM) -> Percept:
    """Locate the stimulus near ``center`` from the samples inside a square window.

    The regression uses every sample in the window, but only pixels within
    ``footprint`` of ``center`` enter the moments (None keeps the whole
    window). Outer pins see long stretches of a curved or cornered path,
    which drags the centroid inside the contour.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold fraction must be in (0, 1), got {threshold}")
    sensor = sensor or SensorModel()
    local = samples.within(center, window / 2.0)
    if len(local) == 0:
        return Percept(None, None, 0.0, False)
    pos, val = merge_nearby(local.positions, local.delta_area)
    hyper = default_hyper(val, sensor, length_scale)
    gp = fit_gpr(pos, val, hyper.signal_var, hyper.length_scale, hyper.noise_var)
    grid = Grid.centered(window, PERCEPT_SPACING_MM, center)
    img = gp.predict(grid.points()).reshape(grid.shape)
    if footprint is not None:
        xx, yy = grid.mesh()
        img = np.where(np.hypot(xx - center[0], yy - center[1]) <= footprint, img, 0.0)
    peak = float(img.max())
    if detect_floor is None:
        detect_floor = DETECTION_SNR * reading_noise(sensor.noise, sensor.frames_per_reading)
    if not (peak > 0 and peak >= detect_floor):
        return Percept(None, None, 0.0, False, peak)
    img = np.where(img >= threshold * peak, img, 0.0)
    mass, centroid, theta = image_moments(img, grid)
    return Percept(centroid, theta, mass, True, peak)


@dataclass(frozen=True)
class Decision:
    move: tuple[float, float]
    heading: float  # the target angle handed to the discretizer, degrees
    branch: str  # "chase" or "continue"


def nearest_move(heading: float, actions: ActionSet) -> tuple[float, float]:
    """Grid move closest to ``heading``; exact ties go counter-clockwise."""
    k = math.floor((heading % 360.0) / 45.0 + 0.5) % 8
    return actions.moves[k]


def select_action(p: Percept, sensor_pos, last_heading: float | None,
                  actions: ActionSet = ActionSet(), chase_distance: float = CHASE_DISTANCE_MM) -> Decision:
    """Pick the next grid move.

    ``last_heading`` is the current direction of travel in degrees, or None
    on the first step.
    """
    if not p.above_threshold:
        raise LostStimulus("no stimulus above threshold")
    dx = p.centroid[0] - sensor_pos[0]
    dy = p.centroid[1] - sensor_pos[1]
    if math.hypot(dx, dy) > chase_distance:
        heading = math.degrees(math.atan2(dy, dx)) % 360.0
        branch = "chase"
    else:
        forward = p.theta % 360.0
        backward = (p.theta + 180.0) % 360.0
        if last_heading is not None and angle_diff(backward, last_heading) < angle_diff(forward, last_heading):
            heading = backward
        else:
            heading = forward
        branch = "continue"
    return Decision(nearest_move(heading, actions), heading, branch)


@dataclass
class StepLog:
    step: int
    pose: tuple[float, float]
    centroid: tuple[float, float] | None
    theta: float | None
    move: tuple[float, float] | None
    branch: str


@dataclass
class ExplorationState:
    position: tuple[float, float]
    last_heading: float | None = None  # direction of travel along the contour, degrees
    visited: list[tuple[float, float]] = field(default_factory=list)
    samples: ScanDataset = field(default_factory=ScanDataset.empty)
    log: list[StepLog] = field(default_factory=list)
    lost: bool = False
    stop_reason: str = ""

    @property
    def steps(self) -> int:
        return len(self.visited) - 1


@dataclass
class ExplorationResult:
    state: ExplorationState
    map: HapticMap | None


def explore(pipeline, start, max_steps: int = 40, stop_radius: float = 10.0,
            actions: ActionSet = ActionSet(), seed=0, map_grid: Grid | None = None,
            window: float = DEFAULT_WINDOW_MM, threshold: float = DEFAULT_THRESHOLD,
            footprint: float | None = PERCEPT_FOOTPRINT_MM, chase_distance: float = CHASE_DISTANCE_MM,
            min_loop_steps: int = 4, on_step=None) -> ExplorationResult:
    """Run the sense-perceive-act loop from ``start``.

    Stops when the sensor comes back within ``stop_radius`` of ``start`` after
    at least ``min_loop_steps`` moves, after ``max_steps`` moves, when the
    stimulus is lost, or when the next pose would leave the simulated field.
    ``on_step(state)`` is called after every reading.

    Only continue moves update the direction of travel. A chase is a
    sideways correction back onto the contour; letting it overwrite the
    heading makes the next continue step pick θ or θ+180° almost at random.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    start = (float(start[0]), float(start[1]))
    state = ExplorationState(start, visited=[start])
    seeds = np.random.SeedSequence(seed)
    radius = pipeline.pins.radius

    while True:
        k = state.steps
        reading = pipeline.read(state.position, seeds.spawn(1)[0])
        state.samples = state.samples.extend(ScanDataset.from_reading(k, reading, pipeline.pins))
        percept = perceive(state.samples, state.position, window, threshold, pipeline.sensor,
                           footprint=footprint)
        entry = StepLog(k, state.position, percept.centroid, percept.theta, None, "")
        state.log.append(entry)
        if on_step is not None:
            on_step(state)

        if k >= min_loop_steps and math.dist(state.position, start) <= stop_radius + 1e-9:
            state.stop_reason = "closed"
            break
        if k >= max_steps:
            state.stop_reason = "max_steps"
            break
        if not percept.above_threshold:
            state.lost = True
            state.stop_reason = "lost"
            entry.branch = "lost"
            break
        decision = select_action(percept, state.position, state.last_heading, actions, chase_distance)
        entry.move, entry.branch = decision.move, decision.branch
        nxt = (state.position[0] + decision.move[0], state.position[1] + decision.move[1])
        if not pipeline.field_grid.contains_disc(nxt, radius):
            state.stop_reason = "left_field"
            break
        state.position = nxt
        if decision.branch == "continue" or state.last_heading is None:
            state.last_heading = decision.heading
        state.visited.append(nxt)

    fused = None
    if len(state.samples) and np.any(state.samples.delta_area != 0):
        grid = map_grid or Grid.centered(80.0, 1.0)
        fused = predict_map(fit_scan(state.samples, sensor=pipeline.sensor), grid)
    return ExplorationResult(state, fused)


def explored_band(visited, grid: Grid, radius: float = PERCEPT_FOOTPRINT_MM) -> np.ndarray:
    """Boolean mask of ``grid`` pixels within ``radius`` of any visited pose."""
    xx, yy = grid.mesh()
    mask = np.zeros(grid.shape, dtype=bool)
    for x, y in visited:
        mask |= np.hypot(xx - x, yy - y) <= radius
    return mask
