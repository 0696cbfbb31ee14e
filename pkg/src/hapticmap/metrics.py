"""Map comparison metrics and summary reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import Grid, HapticMap, ScalarField
from .io import write_rows_csv

_PROFILE_SUBSTEPS = 10
_ISOTROPY_TOL = 1e-9


def _peak_center(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Centroid of every sample attaining the global maximum."""
    peak = values.max()
    iy, ix = np.nonzero(values >= peak - 1e-12 * abs(peak))
    return np.array([grid.x[ix].mean(), grid.y[iy].mean()])


def _principal_axis(weights: np.ndarray, grid: Grid, center) -> np.ndarray:
    xx, yy = grid.mesh()
    dx, dy = xx - center[0], yy - center[1]
    m = weights.sum()
    cov = np.array([
        [(weights * dx * dx).sum(), (weights * dx * dy).sum()],
        [(weights * dx * dy).sum(), (weights * dy * dy).sum()],
    ]) / m
    evals, evecs = np.linalg.eigh(cov)
    if evals[1] - evals[0] <= _ISOTROPY_TOL * max(abs(evals[1]), 1e-300):
        return np.array([1.0, 0.0])
    return evecs[:, 1]


def extent_at_fraction(fld: ScalarField, fraction: float = 0.2) -> float:
    """Diameter (mm) of the region above ``fraction`` of the peak.

    The diameter is measured along the principal axis of the above-threshold
    region. Blob-like maps are cut through their peak; when the
    above-threshold centroid itself is below threshold (a ring) the cut goes
    through that centroid and the outermost crossings give the outer
    diameter. Crossings are located by linear interpolation of a bilinearly
    resampled profile.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    values = np.asarray(fld.values, dtype=float)
    peak = values.max()
    if not peak > 0:
        raise ValueError("extent of an all-zero (or non-positive) map is undefined")
    grid = fld.grid
    thr = fraction * peak
    weights = np.where(values >= thr, values, 0.0)
    xx, yy = grid.mesh()
    centroid = np.array([(weights * xx).sum(), (weights * yy).sum()]) / weights.sum()
    at_centroid = float(fld.sample(centroid[None, :], fill_value=0.0)[0])
    center = _peak_center(values, grid) if at_centroid >= thr else centroid
    axis = _principal_axis(weights, grid, center)

    half = np.hypot(grid.xmax - grid.origin[0], grid.ymax - grid.origin[1])
    step = grid.spacing / _PROFILE_SUBSTEPS
    t = np.arange(-half, half + step / 2, step)
    profile = fld.sample(center + t[:, None] * axis, fill_value=0.0)
    above = np.nonzero(profile >= thr)[0]
    lo, hi = above[0], above[-1]

    def crossing(inside, outside):
        if outside < 0 or outside >= len(t):
            return t[inside]
        p_in, p_out = profile[inside], profile[outside]
        return t[inside] + (t[outside] - t[inside]) * (p_in - thr) / (p_in - p_out)

    return float(crossing(hi, hi + 1) - crossing(lo, lo - 1))


def _normalized(values: np.ndarray) -> np.ndarray:
    vmax = np.nanmax(values)
    return values / vmax if vmax > 0 else np.zeros_like(values)


def rmse_percent(a: ScalarField, b: ScalarField, mask: np.ndarray | None = None) -> float:
    """Pixel-wise RMSE (percent) after scaling each map by its own maximum.

    ``b`` is bilinearly resampled onto ``a``'s grid when the grids differ;
    only the overlapping pixels count. A boolean ``mask`` on ``a``'s grid
    restricts both the scaling and the error to the selected pixels.
    """
    va = np.asarray(a.values, dtype=float)
    vb = np.asarray(b.values, dtype=float)
    if not a.grid.same_as(b.grid):
        vb = b.sample(a.grid.points(), fill_value=np.nan).reshape(a.grid.shape)
    keep = np.isfinite(vb)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != a.grid.shape:
            raise ValueError(f"mask shape {mask.shape} does not match the map grid {a.grid.shape}")
        keep &= mask
    if not keep.any():
        raise ValueError("maps do not overlap")
    va, vb = _normalized(va[keep]), _normalized(vb[keep])
    diff = va - vb
    return float(100.0 * np.sqrt(np.mean(diff * diff)))


@dataclass
class StimulusResult:
    """Everything known about one stimulus; missing pieces leave gaps in the report."""

    name: str
    tactile_map: HapticMap | None = None
    reference: ScalarField | None = None
    path_length_mm: float | None = None
    max_delta_area: float | None = None


@dataclass
class ReportRow:
    stimulus: str
    peak_value: float | None
    peak_units: str
    extent_mm: float | None
    rmse_percent: float | None
    path_length_mm: float | None
    max_delta_area: float | None
    reference_peak: float | None = None
    reference_units: str = ""
    reference_extent_mm: float | None = None
    complete: bool = True


@dataclass
class ComparisonReport:
    rows: list[ReportRow] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    COLUMNS = ("stimulus", "peak_value", "peak_units", "extent_mm", "rmse_percent",
               "path_length_mm", "max_delta_area", "reference_peak", "reference_units",
               "reference_extent_mm", "complete")

    def as_table(self) -> list[list[str]]:
        def cell(v):
            if v is None:
                return "-"
            if isinstance(v, bool):
                return "yes" if v else "no"
            if isinstance(v, float):
                return f"{v:.3f}"
            return str(v)

        return [[cell(getattr(r, c)) for c in self.COLUMNS] for r in self.rows]

    def to_text(self) -> str:
        body = self.as_table()
        widths = [max([len(c)] + [len(row[i]) for row in body]) for i, c in enumerate(self.COLUMNS)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(self.COLUMNS, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in body]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    def write(self, out_dir, stem="report") -> list[Path]:
        out_dir = Path(out_dir)
        csv_path = write_rows_csv(
            out_dir / f"{stem}.csv", self.COLUMNS,
            [["" if getattr(r, c) is None else getattr(r, c) for c in self.COLUMNS] for r in self.rows],
        )
        txt_path = out_dir / f"{stem}.txt"
        txt_path.write_text(self.to_text())
        return [csv_path, txt_path]


PATH_LENGTH_NOTE = (
    "path_length_mm is the traversed focal-point path in millimetres; "
    "path lengths quoted in centimetres elsewhere differ by a factor of 10"
)


def report(stimuli, fraction: float = 0.2) -> ComparisonReport:
    """One row per stimulus, sorted by name."""
    out = ComparisonReport()
    for res in sorted(stimuli, key=lambda s: s.name):
        m = res.tactile_map
        ref = res.reference
        complete = m is not None
        peak = extent = err = None
        if m is not None:
            peak = m.raw_max if isinstance(m, HapticMap) else float(m.values.max())
            extent = extent_at_fraction(m, fraction) if peak > 0 else None
            if ref is not None:
                err = rmse_percent(m, ref)
        max_da = res.max_delta_area
        if max_da is None and isinstance(m, HapticMap):
            max_da = m.raw_max
        ref_peak = ref_extent = None
        if ref is not None and ref.values.max() > 0:
            ref_peak = float(ref.values.max())
            ref_extent = extent_at_fraction(ref, fraction)
        out.rows.append(ReportRow(
            res.name, peak, "mm^2" if isinstance(m, HapticMap) else (m.units if m is not None else ""),
            extent, err, res.path_length_mm, max_da, ref_peak,
            ref.units if ref is not None else "", ref_extent, complete,
        ))
    if any(r.path_length_mm is not None for r in out.rows):
        out.notes.append(PATH_LENGTH_NOTE)
    return out
