"""Synthetic intensity datasets for perception tests."""
import math

import numpy as np

from hapticmap.mapping import ScanDataset


def dataset(points, values):
    n = len(values)
    return ScanDataset(np.zeros(n, int), np.arange(n), np.asarray(points, float), np.asarray(values, float))


def lattice(center, half_width=15.0, spacing=1.0):
    ax = np.arange(-half_width, half_width + spacing / 2, spacing)
    xx, yy = np.meshgrid(ax + center[0], ax + center[1])
    return np.column_stack([xx.ravel(), yy.ravel()])


def bar(points, angle_deg, center=(0.0, 0.0), half_length=11.0, width=1.5):
    """Soft-edged bar: Gaussian across, flat along with Gaussian end caps."""
    t = math.radians(angle_deg)
    d = points - np.asarray(center)
    along = d[:, 0] * math.cos(t) + d[:, 1] * math.sin(t)
    across = -d[:, 0] * math.sin(t) + d[:, 1] * math.cos(t)
    over = np.maximum(np.abs(along) - half_length, 0.0)
    return np.exp(-(across ** 2 + over ** 2) / (2 * width ** 2))


def blob(points, center, sigma=3.0):
    d2 = ((points - np.asarray(center)) ** 2).sum(1)
    return np.exp(-d2 / (2 * sigma ** 2))
