"""Regular 2D grids and the scalar fields sampled on them.

Every field in the package (pressure, indentation, haptic maps) lives on a
:class:`Grid`: ``values[iy, ix]`` is the sample at
``x = origin[0] + ix * spacing``, ``y = origin[1] + iy * spacing``.
Row 0 is therefore the *lowest* y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator


class GeometryError(ValueError):
    """A grid, pose or sensor footprint is geometrically invalid."""


@dataclass(frozen=True)
class Grid:
    origin: tuple[float, float]
    spacing: float
    shape: tuple[int, int]  # (ny, nx)

    def __post_init__(self):
        if not self.spacing > 0:
            raise GeometryError(f"grid spacing must be > 0, got {self.spacing}")
        ny, nx = self.shape
        if ny < 1 or nx < 1:
            raise GeometryError(f"grid shape must be positive, got {self.shape}")

    @classmethod
    def from_extent(cls, xmin, xmax, ymin, ymax, spacing) -> "Grid":
        """Grid whose outermost samples sit exactly on the given bounds."""
        if not spacing > 0:
            raise GeometryError(f"grid spacing must be > 0, got {spacing}")
        counts = []
        for lo, hi in ((xmin, xmax), (ymin, ymax)):
            steps = (hi - lo) / spacing
            n = round(steps)
            if hi < lo or abs(steps - n) > 1e-9 * max(1.0, abs(steps)):
                raise GeometryError(
                    f"extent [{lo}, {hi}] is not a whole number of {spacing} mm steps"
                )
            counts.append(n + 1)
        return cls((float(xmin), float(ymin)), float(spacing), (counts[1], counts[0]))

    @classmethod
    def centered(cls, width, spacing, center=(0.0, 0.0)) -> "Grid":
        half = width / 2.0
        cx, cy = center
        return cls.from_extent(cx - half, cx + half, cy - half, cy + half, spacing)

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.shape[1])

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + self.spacing * np.arange(self.shape[0])

    @property
    def xmax(self) -> float:
        return self.origin[0] + self.spacing * (self.shape[1] - 1)

    @property
    def ymax(self) -> float:
        return self.origin[1] + self.spacing * (self.shape[0] - 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y)

    def points(self) -> np.ndarray:
        """All sample coordinates as an (ny*nx, 2) array in row-major order."""
        xx, yy = self.mesh()
        return np.column_stack([xx.ravel(), yy.ravel()])

    def contains_disc(self, center, radius) -> bool:
        cx, cy = center
        eps = 1e-9
        return (
            cx - radius >= self.origin[0] - eps
            and cx + radius <= self.xmax + eps
            and cy - radius >= self.origin[1] - eps
            and cy + radius <= self.ymax + eps
        )

    def overhang(self, center, radius) -> float:
        """How far (mm) a disc pokes outside the grid; 0 when fully inside."""
        cx, cy = center
        return max(
            0.0,
            self.origin[0] - (cx - radius),
            (cx + radius) - self.xmax,
            self.origin[1] - (cy - radius),
            (cy + radius) - self.ymax,
        )

    def same_as(self, other: "Grid", tol=1e-9) -> bool:
        return (
            self.shape == other.shape
            and math.isclose(self.spacing, other.spacing, rel_tol=tol, abs_tol=tol)
            and all(math.isclose(a, b, abs_tol=tol) for a, b in zip(self.origin, other.origin))
        )


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray
    units: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GeometryError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @property
    def peak(self) -> float:
        return float(self.values.max())

    def sample(self, points, fill_value=np.nan) -> np.ndarray:
        """Bilinear interpolation at arbitrary (N, 2) world points."""
        interp = RegularGridInterpolator(
            (self.grid.y, self.grid.x), self.values, bounds_error=False, fill_value=fill_value
        )
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return interp(pts[:, ::-1])

    def resample(self, grid: Grid, fill_value=np.nan) -> "ScalarField":
        vals = self.sample(grid.points(), fill_value=fill_value).reshape(grid.shape)
        return type(self)(grid, vals, self.units)


@dataclass
class PressureField(ScalarField):
    units: str = "kPa"


@dataclass
class IndentationField(ScalarField):
    units: str = "mm"


@dataclass
class HapticMap(ScalarField):
    """Normalized map in [0, 1]; ``raw_max`` is the value mapped to 1."""

    units: str = "normalized"
    raw_max: float = 0.0
    variance: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_empty(self) -> bool:
        return not self.raw_max > 0

    @property
    def raw_values(self) -> np.ndarray:
        return self.values * self.raw_max
