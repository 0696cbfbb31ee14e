import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import Voronoi
from shapely.geometry import Point, Polygon

from hapticmap.voronoi import bounded_cell_areas

R = 20.0
DISC = math.pi * R * R


def shapely_cells(points, radius):
    """Oracle: clip finite Voronoi cells (with far mirror seeds) to a fine disc polygon."""
    pts = np.asarray(points)
    far = 100.0 * radius
    box = np.array([[far, 0], [-far, 0], [0, far], [0, -far], [far, far], [-far, -far], [far, -far], [-far, far]])
    vor = Voronoi(np.vstack([pts, box]))
    disc = Point(0, 0).buffer(radius, quad_segs=4096)
    out = []
    for i in range(len(pts)):
        region = vor.regions[vor.point_region[i]]
        poly = Polygon(vor.vertices[region]).convex_hull
        out.append(poly.intersection(disc).area)
    return np.array(out)


def random_points(rng, n, radius=R * 0.98):
    r = radius * np.sqrt(rng.random(n))
    t = rng.random(n) * 2 * np.pi
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


@pytest.mark.parametrize("seed", range(5))
def test_against_shapely(seed):
    pts = random_points(np.random.default_rng(seed), 40)
    ours = bounded_cell_areas(pts, R)
    oracle = shapely_cells(pts, R)
    # the oracle's circle is a polygon, so it is short by ~1e-6 relative
    assert np.allclose(ours, oracle, rtol=1e-5, atol=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 150), st.integers(0, 2**32 - 1))
def test_cells_tile_the_disc(n, seed):
    pts = random_points(np.random.default_rng(seed), n)
    areas = bounded_cell_areas(pts, R)
    assert np.all(areas > 0)
    assert abs(areas.sum() - DISC) / DISC < 1e-9


def test_single_seed_cells_are_disc_sectors():
    # three seeds at 120 degree spacing split the disc into equal thirds
    t = np.array([0, 2, 4]) * np.pi / 3
    pts = 5 * np.column_stack([np.cos(t), np.sin(t)])
    assert np.allclose(bounded_cell_areas(pts, R), DISC / 3, rtol=1e-12)


def test_duplicates_are_tie_broken():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 1.0], [-3.0, 4.0]])
    areas = bounded_cell_areas(pts, R)
    assert np.isfinite(areas).all()
    assert areas.sum() == pytest.approx(DISC, rel=1e-9)


def test_collinear_rejected():
    with pytest.raises(ValueError):
        bounded_cell_areas(np.array([[0, 0], [1, 1], [2, 2.0]]), R)
    with pytest.raises(ValueError):
        bounded_cell_areas(np.zeros((2, 2)), R)
