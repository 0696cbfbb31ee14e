import time

import pytest

from hapticmap import make_shape
from hapticmap.mapping import ScanSpec, fit_scan, grid_scan, predict_map
from hapticmap.pipeline import COMPARISON_MAP_GRID, StimulusPipeline

# filled in by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


class ScanRun:
    def __init__(self, shape):
        t0 = time.perf_counter()
        spec = ScanSpec.centered()
        self.pipeline = StimulusPipeline.covering(make_shape(shape), spec.poses())
        self.data = grid_scan(self.pipeline, spec, seed=0)
        self.model = fit_scan(self.data, sensor=self.pipeline.sensor)
        self.map = predict_map(self.model, COMPARISON_MAP_GRID)
        self.reference = self.pipeline.pressure.resample(COMPARISON_MAP_GRID)
        self.seconds = time.perf_counter() - t0  # synthesis + scan + GPR + map


_RUNS = {}


@pytest.fixture(scope="session")
def scan_run():
    """Full 9x9 scan per shape, computed once per session."""
    def get(shape):
        if shape not in _RUNS:
            _RUNS[shape] = ScanRun(shape)
        return _RUNS[shape]
    return get
