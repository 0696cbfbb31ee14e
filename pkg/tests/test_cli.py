import json

import numpy as np
import pytest

from hapticmap.cli import EXIT_CONFIG, EXIT_GEOMETRY, EXIT_IO, EXIT_LOST, EXIT_OK, main
from hapticmap.config import ConfigError, dump_config, load_config, parse_overrides
from hapticmap.io import read_field_csv, read_pgm

SMALL_SCAN = ["--set", "scan.rows=3", "--set", "scan.cols=3", "--set", "scan.map_spacing=1"]


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_config_round_trip(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[stimulus]\nshape = circle\nsize = 30\n[sensor]\nnoise = 0\n[run]\nseed = 5\n")
    cfg = load_config(ini, parse_overrides(["scan.rows=3", "explore.start_x=1", "explore.start_y=2"]))
    assert cfg.stimulus.shape == "circle" and cfg.stimulus.size == 30.0
    assert cfg.sensor.noise == 0.0 and cfg.seed == 5 and cfg.scan.rows == 3
    again = load_config(dump_config(cfg, tmp_path / "back.ini"))
    assert again.as_dict() == cfg.as_dict()


@pytest.mark.parametrize("text, match", [
    ("[stimulus]\nshape = hexagon\n", "valid shapes"),
    ("[stimulus]\ncolour = red\n", "unknown key"),
    ("[nonsense]\na = 1\n", "unknown section"),
    ("[sensor]\nnoise = lots\n", "cannot read"),
    ("[sensor]\nnoise = -1\n", "noise"),
    ("[run]\nseed = -3\n", "seed"),
    ("no section header\n", "malformed"),
])
def test_config_errors(tmp_path, text, match):
    ini = tmp_path / "bad.ini"
    ini.write_text(text)
    with pytest.raises(ConfigError, match=match):
        load_config(ini)


def test_start_needs_both_coordinates():
    with pytest.raises(ConfigError):
        load_config(None, {"explore": {"start_x": "3"}}).explore.start(None)


def test_bad_override_syntax():
    with pytest.raises(ConfigError):
        parse_overrides(["noequals"])


def test_synth_writes_fields(tmp_path):
    assert run(tmp_path, "synth") == EXIT_OK
    for name in ("point_pressure.csv", "point_pressure.pgm", "point_indent.csv", "point_indent.pgm",
                 "manifest.json", "config.ini"):
        assert (tmp_path / name).exists()
    p = read_field_csv(tmp_path / "point_pressure.csv")
    assert p.values.max() == pytest.approx(1.0)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "synth" and "point_pressure.csv" in man["outputs"]


def test_invalid_shape_exit_code(tmp_path, capsys):
    assert run(tmp_path, "synth", "--set", "stimulus.shape=hexagon") == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "circle" in err and "rose" in err


def test_geometry_error_exit_code(tmp_path):
    assert run(tmp_path, "synth", "--set", "focal.sigma=0.5") == EXIT_GEOMETRY


def test_unreadable_config_is_config_error(tmp_path):
    assert run(tmp_path, "synth", "--config", str(tmp_path / "missing.ini")) == EXIT_CONFIG


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["synth", "--out", str(blocker / "sub")]) == EXIT_IO


def test_single_pose_scan(tmp_path):
    assert run(tmp_path, "scan", "--set", "scan.rows=1", "--set", "scan.cols=1",
               "--set", "scan.map_spacing=1") == EXIT_OK
    lines = (tmp_path / "scan_dataset.csv").read_text().splitlines()
    assert lines[0] == "pose,pin,x_mm,y_mm,delta_area_mm2"
    assert len(lines) == 128
    assert {line.split(",")[0] for line in lines[1:]} == {"0"}


def test_scan_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["scan", *SMALL_SCAN, "--seed", "11", "--out", str(a)]) == EXIT_OK
    assert main(["scan", *SMALL_SCAN, "--seed", "11", "--out", str(b)]) == EXIT_OK
    for name in ("scan_dataset.csv", "scan_map.csv", "scan_variance.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    man = json.loads((a / "manifest.json").read_text())
    assert man["seed"] == 11 and man["poses"] == 9 and man["raw_max"] > 0
    c = tmp_path / "c"
    main(["scan", *SMALL_SCAN, "--seed", "12", "--out", str(c)])
    assert (a / "scan_dataset.csv").read_bytes() != (c / "scan_dataset.csv").read_bytes()


def test_manifest_config_reproduces_run(tmp_path):
    a = tmp_path / "a"
    main(["scan", *SMALL_SCAN, "--seed", "4", "--out", str(a)])
    b = tmp_path / "b"
    assert main(["scan", "--config", str(a / "config.ini"), "--out", str(b)]) == EXIT_OK
    assert (a / "scan_map.csv").read_bytes() == (b / "scan_map.csv").read_bytes()


def test_explore_circle_with_snapshots(tmp_path):
    rc = run(tmp_path, "explore", "--snapshots", "--set", "stimulus.shape=circle", "--set", "stimulus.size=40")
    assert rc == EXIT_OK
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert rows[0] == "step,x_mm,y_mm,centroid_x,centroid_y,theta_deg,move_x,move_y,branch"
    steps = len(rows) - 2
    assert steps <= 20
    snaps = sorted((tmp_path / "snapshots").glob("step_*.pgm"))
    assert len(snaps) == steps + 1
    assert read_pgm(snaps[-1]).max() == 65535
    assert (tmp_path / "explore_map.csv").exists()


def test_explore_zero_amplitude_is_lost(tmp_path):
    rc = run(tmp_path, "explore", "--set", "stimulus.shape=circle", "--set", "stimulus.amplitude_scale=0")
    assert rc == EXIT_LOST
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].endswith("lost")
    assert json.loads((tmp_path / "manifest.json").read_text())["lost"] is True


def test_compare_map_with_itself(tmp_path):
    run(tmp_path, "synth")
    p = tmp_path / "point_pressure.csv"
    assert run(tmp_path, "compare", str(p), "--reference", str(p)) == EXIT_OK
    text = (tmp_path / "report.csv").read_text().splitlines()
    row = dict(zip(text[0].split(","), text[1].split(",")))
    assert float(row["rmse_percent"]) == 0.0


def test_compare_reference_must_cover(tmp_path):
    run(tmp_path, "synth", "--set", "scan.map_width=20")
    small = tmp_path / "small"
    small.mkdir()
    (small / "ref.csv").write_bytes((tmp_path / "point_pressure.csv").read_bytes())
    run(tmp_path, "synth", "--set", "scan.map_width=40")
    rc = run(tmp_path, "compare", str(tmp_path / "point_pressure.csv"), "--reference", str(small / "ref.csv"))
    assert rc == EXIT_GEOMETRY


def test_compare_needs_input(tmp_path):
    assert run(tmp_path, "compare") == EXIT_CONFIG


@pytest.mark.slow
def test_compare_simulated_shapes(tmp_path):
    rc = run(tmp_path, "compare", "--shapes", "point", "line", *SMALL_SCAN[:4])
    assert rc == EXIT_OK
    rows = (tmp_path / "report.csv").read_text().splitlines()
    header = rows[0].split(",")
    line = dict(zip(header, rows[1].split(",")))
    assert line["stimulus"] == "line" and float(line["path_length_mm"]) == 40.0
    assert float(line["max_delta_area"]) > 0
