import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hapticmap.grid import GeometryError, Grid, IndentationField
from hapticmap.sensor import (SensorModel, TactileFrame, mean_displacement, pin_lattice, read_sensor,
                              sample_markers, voronoi_features)

PINS = pin_lattice()
GRID = Grid.centered(60.0, 0.1)


def gaussian_z(peak=0.01, sigma=5.3, center=(0.0, 0.0), grid=GRID):
    xx, yy = grid.mesh()
    r2 = (xx - center[0]) ** 2 + (yy - center[1]) ** 2
    return IndentationField(grid, peak * np.exp(-r2 / (2 * sigma ** 2)))


ZERO = IndentationField(GRID, np.zeros(GRID.shape))
QUIET = SensorModel(lever_gain=10.0, noise=0.0)


def test_lattice_shape():
    assert len(PINS) == 127
    r = np.hypot(*PINS.rest.T)
    assert r.max() == pytest.approx(18.0)
    assert r.max() < 20.0
    d = np.linalg.norm(PINS.rest[:, None] - PINS.rest[None], axis=2)
    d[np.diag_indices_from(d)] = np.inf
    assert d.min() > 1.0
    assert np.bincount(PINS.ring).tolist() == [1, 6, 12, 18, 24, 30, 36]


def test_lattice_sixfold_symmetry():
    t = math.radians(60)
    rot = PINS.rest @ np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
    d = np.linalg.norm(rot[:, None] - PINS.rest[None], axis=2)
    assert d.min(axis=1).max() < 1e-9


def test_zero_field_no_noise_is_rest():
    f = sample_markers(ZERO, (0, 0), QUIET)
    assert np.array_equal(f.deformed, PINS.rest)
    assert not voronoi_features(f).delta_area.any()


def test_central_marker_still_under_centred_gaussian():
    f = sample_markers(gaussian_z(), (0, 0), QUIET)
    assert np.allclose(f.deformed[0], 0.0, atol=1e-12)


def test_gradient_oracle():
    peak, sigma = 0.01, 5.3
    z = gaussian_z(peak, sigma)
    model = SensorModel(lever_gain=100.0, noise=0.0)
    # any pin; move the sensor so that pin sits at distance sigma from the peak
    pin = PINS.rest[7]
    direction = pin / np.linalg.norm(pin)
    pose = direction * sigma - pin
    shift = mean_displacement(z, pose, model)[7]
    expected = model.lever_gain * peak * math.exp(-0.5) / sigma
    # outward and of analytic magnitude (finite differences on a 0.1 mm grid)
    assert np.dot(shift, direction) == pytest.approx(expected, rel=2e-4)
    assert abs(shift[0] * direction[1] - shift[1] * direction[0]) < 1e-6


def test_uniform_scaling_of_interior_markers():
    eps = 0.01
    rest = PINS.rest
    outer = PINS.ring == PINS.ring.max()
    deformed = np.where(outer[:, None], rest, rest * (1 + eps))
    dA = voronoi_features(TactileFrame(rest, deformed, (0, 0))).delta_area
    inner = PINS.ring < PINS.ring.max() - 1
    assert np.all(dA[inner] > 0)
    assert np.all(dA[outer] < 0)
    assert abs(dA.sum()) < 1e-6


def test_central_pin_has_max_delta_area():
    dA = read_sensor(gaussian_z(), (0, 0), SensorModel(lever_gain=100.0, noise=0.0)).delta_area
    assert dA.argmax() == 0
    assert dA[0] > 0


def test_noise_free_reading_equals_single_frame():
    z = gaussian_z(center=(3, -2))
    model = SensorModel(lever_gain=50.0, noise=0.0)
    one = voronoi_features(sample_markers(z, (0, 0), model)).delta_area
    avg = read_sensor(z, (0, 0), model).delta_area
    assert np.allclose(one, avg, atol=1e-12)


@pytest.mark.slow
def test_averaging_reduces_noise_by_sqrt_frames():
    model1 = SensorModel(noise=0.05, frames_per_reading=1)
    model30 = SensorModel(noise=0.05, frames_per_reading=30)
    seeds = np.random.SeedSequence(123).spawn(1000)
    single = np.array([read_sensor(ZERO, (0, 0), model1, s).delta_area for s in seeds])
    # 30-frame readings: fewer seeds keep the run short, still 127 pins each
    averaged = np.array([read_sensor(ZERO, (0, 0), model30, s).delta_area for s in seeds[:200]])
    ratio = averaged.std(axis=0).mean() / single.std(axis=0).mean()
    assert ratio == pytest.approx(1 / math.sqrt(30), rel=0.2)


def test_seeded_reading_is_bit_identical():
    z = gaussian_z(center=(2, 1))
    model = SensorModel()
    a = read_sensor(z, (0, 0), model, seed=2**64 - 1).delta_area
    b = read_sensor(z, (0, 0), model, seed=2**64 - 1).delta_area
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, read_sensor(z, (0, 0), model, seed=1).delta_area)


def test_footprint_outside_field():
    with pytest.raises(GeometryError, match="overhangs"):
        read_sensor(ZERO, (15.0, 0.0), QUIET)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.001, 0.03), st.floats(1.0, 4.0))
def test_area_conserved(cx, cy, peak, gain):
    z = gaussian_z(peak, 4.0, (cx, cy))
    model = SensorModel(lever_gain=gain * 1000, noise=0.05, frames_per_reading=1)
    f = sample_markers(z, (0, 0), model, seed=7)
    assert np.all(np.hypot(*f.deformed.T) <= 20.0 + 1e-12)
    assert abs(voronoi_features(f).delta_area.sum()) < 1e-6


def test_rotation_equivariance():
    # field rotated by 60 degrees about the sensor centre permutes the readings
    z1 = gaussian_z(0.01, 4.0, (4.0, 1.5))
    t = math.radians(60)
    c2 = (4.0 * math.cos(t) - 1.5 * math.sin(t), 4.0 * math.sin(t) + 1.5 * math.cos(t))
    z2 = gaussian_z(0.01, 4.0, c2)
    model = SensorModel(lever_gain=100.0, noise=0.0)
    a = read_sensor(z1, (0, 0), model).delta_area
    b = read_sensor(z2, (0, 0), model).delta_area
    perm = PINS.rotation_permutation(60)
    # pin i lands on perm[i], so b at perm[i] is a at i; gradients come from a
    # 0.1 mm finite-difference grid, which limits the match
    assert np.max(np.abs(b[perm] - a)) < 1e-3 * np.abs(a).max()


def test_small_signal_linear_in_gain():
    z = gaussian_z(0.001, 5.0, (2.0, -1.0))
    a = read_sensor(z, (0, 0), SensorModel(lever_gain=100.0, noise=0.0)).delta_area
    b = read_sensor(z, (0, 0), SensorModel(lever_gain=200.0, noise=0.0)).delta_area
    big = np.abs(a) > 0.1 * np.abs(a).max()
    assert np.allclose(b[big] / a[big], 2.0, rtol=0.02)


@pytest.mark.parametrize("kw", [{"lever_gain": 0}, {"noise": -1}, {"frames_per_reading": 0}])
def test_model_validation(kw):
    with pytest.raises(ValueError):
        SensorModel(**kw)
