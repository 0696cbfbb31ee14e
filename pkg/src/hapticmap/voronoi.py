"""Voronoi cell areas bounded by a disc.

Cells come from the unbounded Voronoi diagram of the seeds plus a ring of far
ghost seeds (which keeps every real cell finite without touching the disc),
and each convex cell is intersected with the exact circle. Clipped areas
therefore tile the disc: they sum to pi * R**2 up to rounding.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import Voronoi

TIE_BREAK_MM = 1e-9
_GHOST_COUNT = 8
_GHOST_RADIUS_FACTOR = 10.0  # anything > 3R keeps ghost cells out of the disc


def _segment_disc_area(a: np.ndarray, b: np.ndarray, radius: float) -> np.ndarray:
    """Signed area of triangle (origin, a, b) intersected with the disc, per row."""
    d = b - a
    qa = np.einsum("ij,ij->i", d, d)
    qb = 2.0 * np.einsum("ij,ij->i", a, d)
    qc = np.einsum("ij,ij->i", a, a) - radius * radius
    disc = qb * qb - 4.0 * qa * qc
    hit = (disc > 0) & (qa > 0)
    sq = np.sqrt(np.where(hit, disc, 0.0))
    denom = np.where(hit, 2.0 * qa, 1.0)
    t1 = np.where(hit, np.clip((-qb - sq) / denom, 0.0, 1.0), 0.0)
    t2 = np.where(hit, np.clip((-qb + sq) / denom, 0.0, 1.0), 0.0)
    p1 = a + t1[:, None] * d
    p2 = a + t2[:, None] * d

    def cross(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

    def sector(u, v):
        return 0.5 * radius * radius * np.arctan2(cross(u, v), np.einsum("ij,ij->i", u, v))

    # a -> p1 and p2 -> b lie outside the circle, p1 -> p2 inside
    return sector(a, p1) + 0.5 * cross(p1, p2) + sector(p2, b)


def break_ties(points: np.ndarray) -> np.ndarray:
    """Nudge exact duplicates apart by multiples of 1e-9 mm along x."""
    pts = np.array(points, dtype=float)
    _, inverse, counts = np.unique(pts, axis=0, return_inverse=True, return_counts=True)
    if np.all(counts == 1):
        return pts
    inverse = inverse.ravel()
    seen: dict[int, int] = {}
    for i, group in enumerate(inverse):
        k = seen.get(group, 0)
        if k:
            pts[i, 0] += k * TIE_BREAK_MM
        seen[group] = k + 1
    return pts


def bounded_cell_areas(points, radius: float) -> np.ndarray:
    """Area of each seed's Voronoi cell clipped to the origin-centred disc.

    Seeds are assumed to lie inside the disc.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    n = len(pts)
    if n < 3 or np.linalg.matrix_rank(pts - pts.mean(axis=0), tol=1e-12) < 2:
        raise ValueError("need at least 3 non-collinear points")
    pts = break_ties(pts)

    ang = 2.0 * np.pi * (np.arange(_GHOST_COUNT) + 0.5) / _GHOST_COUNT
    ghosts = _GHOST_RADIUS_FACTOR * radius * np.column_stack([np.cos(ang), np.sin(ang)])
    vor = Voronoi(np.vstack([pts, ghosts]))

    # every ridge of a real cell is finite; orient each one counter-clockwise
    # around its seed (seed on the left of v0 -> v1) and credit its clipped area
    ridges = np.asarray(vor.ridge_vertices)
    pairs = vor.ridge_points
    real = (pairs < n).any(axis=1)
    ridges, pairs = ridges[real], pairs[real]
    if np.any(ridges < 0):
        raise RuntimeError("a real Voronoi cell is unbounded despite ghost seeds")
    v0 = vor.vertices[ridges[:, 0]]
    v1 = vor.vertices[ridges[:, 1]]
    area = _segment_disc_area(v0, v1, radius)
    edge = v1 - v0
    areas = np.zeros(n)
    for side in (0, 1):
        idx = pairs[:, side]
        keep = idx < n
        rel = vor.points[idx[keep]] - v0[keep]
        left = np.sign(edge[keep, 0] * rel[:, 1] - edge[keep, 1] * rel[:, 0])
        areas += np.bincount(idx[keep], weights=left * area[keep], minlength=n)
    return areas
