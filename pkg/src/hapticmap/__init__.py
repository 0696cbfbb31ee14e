"""Simulated tactile robot for mapping ultrasonic mid-air haptic stimuli.

The pipeline runs stimulus synthesis, skin indentation, a virtual pin-array
sensor with bounded-Voronoi features, GP map fusion and moment-based contour
exploration.
"""
from .acoustics import SHAPES, FocalSpotModel, StimulusSpec, make_shape, path_length, time_averaged_field
from .explore import ActionSet, LostStimulus, Percept, explore, perceive, select_action
from .grid import GeometryError, Grid, HapticMap, IndentationField, PressureField
from .mapping import ScanDataset, ScanSpec, fit_scan, grid_scan, predict_map
from .metrics import ComparisonReport, extent_at_fraction, report, rmse_percent
from .pipeline import StimulusPipeline
from .sensor import SensorModel, pin_lattice, read_sensor
from .skin import SkinModel, indent

__all__ = [
    "SHAPES", "FocalSpotModel", "StimulusSpec", "make_shape", "path_length", "time_averaged_field",
    "ActionSet", "LostStimulus", "Percept", "explore", "perceive", "select_action",
    "GeometryError", "Grid", "HapticMap", "IndentationField", "PressureField",
    "ScanDataset", "ScanSpec", "fit_scan", "grid_scan", "predict_map",
    "ComparisonReport", "extent_at_fraction", "report", "rmse_percent",
    "StimulusPipeline", "SensorModel", "pin_lattice", "read_sensor", "SkinModel", "indent",
]
