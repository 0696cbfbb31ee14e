"""Quasi-static skin indentation under acoustic radiation pressure."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .acoustics import POINT_SIGMA_MM
from .grid import GeometryError, IndentationField, PressureField

#: Pressure below which the tactile robot stops responding (kPa).
ROBOT_DETECT_THRESHOLD_KPA = 0.4
#: Indentation 20 %-of-peak radius measured on the tactile robot (mm).
POINT_INDENT_RADIUS_MM = 9.5
#: Spreading width that broadens the 13 mm focal spot to a 19 mm indentation.
POINT_PSF_SIGMA_MM = math.sqrt(
    (POINT_INDENT_RADIUS_MM / math.sqrt(2.0 * math.log(5.0))) ** 2 - POINT_SIGMA_MM ** 2
)
KERNEL_TRUNCATE = 4.0


@dataclass(frozen=True)
class SkinModel:
    compliance: float = 1e-3  # mm / kPa
    psf_sigma: float = POINT_PSF_SIGMA_MM  # mm
    detect_threshold: float = 0.0  # kPa

    def __post_init__(self):
        if not self.compliance > 0:
            raise ValueError(f"compliance must be > 0, got {self.compliance}")
        if self.psf_sigma < 0:
            raise ValueError(f"psf_sigma must be >= 0, got {self.psf_sigma}")
        if self.detect_threshold < 0:
            raise ValueError(f"detect_threshold must be >= 0, got {self.detect_threshold}")


def indent(pressure: PressureField, model: SkinModel) -> IndentationField:
    """z = compliance * (G * max(p - threshold, 0)) with a unit-mass Gaussian G.

    Outside the grid the pressure is taken as zero.
    """
    grid = pressure.grid
    excess = np.maximum(pressure.values - model.detect_threshold, 0.0)
    if model.psf_sigma == 0:
        return IndentationField(grid, model.compliance * excess)
    reach = KERNEL_TRUNCATE * model.psf_sigma
    width = grid.spacing * (min(grid.shape) - 1)
    if reach > width / 2.0:
        raise GeometryError(
            f"spreading kernel reach {reach:.3g} mm exceeds half the field width {width / 2.0:.3g} mm"
        )
    spread = ndimage.gaussian_filter(
        excess, sigma=model.psf_sigma / grid.spacing, mode="constant", cval=0.0,
        truncate=KERNEL_TRUNCATE,
    )
    return IndentationField(grid, model.compliance * np.maximum(spread, 0.0))
