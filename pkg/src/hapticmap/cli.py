"""Command-line driver.

    hapticmap synth   --config run.ini --out out/
    hapticmap scan    --config run.ini --seed 3 --out out/
    hapticmap explore --config run.ini --snapshots --out out/
    hapticmap compare out/scan_map.csv --reference out/circle_pressure.csv --out out/
    hapticmap compare --shapes extended --out out/

Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 geometry
error, 4 stimulus lost during exploration.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import sys
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .acoustics import path_length
from .config import ConfigError, RunConfig, dump_config, load_config, parse_overrides
from .explore import explore
from .grid import GeometryError, Grid, ScalarField
from .io import read_field_csv, write_field, write_manifest, write_pgm, write_rows_csv
from .mapping import fit_scan, grid_scan, predict_map
from .metrics import StimulusResult, report
from .pipeline import StimulusPipeline

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_GEOMETRY = 3
EXIT_LOST = 4

BASIC_SHAPES = ("point", "circle")
EXTENDED_SHAPES = ("line", "triangle", "square", "small_cross", "large_cross", "rose")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _finish(out: Path, command: str, cfg: RunConfig, files: list[Path], **extra) -> Path:
    files = files + [dump_config(cfg, out / "config.ini")]
    payload = {
        "command": command,
        "seed": cfg.seed,
        "config": cfg.as_dict(),
        "versions": {"hapticmap": _version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": {p.name: _sha256(p) for p in files},
    }
    payload.update(extra)
    return write_manifest(out / "manifest.json", payload)


def _pipeline(cfg: RunConfig, poses, stimulus=None) -> StimulusPipeline:
    return StimulusPipeline.covering(stimulus or cfg.stimulus.build(), poses, focal=cfg.focal,
                                     skin=cfg.skin, sensor=cfg.sensor)


def _on_grid(fld: ScalarField, grid: Grid) -> ScalarField:
    vals = fld.sample(grid.points(), fill_value=0.0).reshape(grid.shape)
    return type(fld)(grid, vals, fld.units)


def cmd_synth(cfg: RunConfig, out: Path) -> int:
    """Pressure and indentation fields on the scan's map grid."""
    grid = cfg.scan.map_grid()
    corners = [(grid.origin[0], grid.origin[1]), (grid.xmax, grid.ymax)]
    pipe = _pipeline(cfg, corners)
    name = pipe.stimulus.name
    files = write_field(out, f"{name}_pressure", _on_grid(pipe.pressure, grid))
    files += write_field(out, f"{name}_indent", _on_grid(pipe.indentation, grid))
    _finish(out, "synth", cfg, files,
            pressure_peak_kpa=float(pipe.pressure.values.max()),
            indentation_peak_mm=float(pipe.indentation.values.max()))
    print(f"synth: wrote {len(files)} files to {out}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig, out: Path) -> int:
    spec = cfg.scan.build()
    pipe = _pipeline(cfg, spec.poses())
    data = grid_scan(pipe, spec, cfg.seed)
    model = fit_scan(data, sensor=cfg.sensor)
    hmap = predict_map(model, cfg.scan.map_grid(), with_variance=cfg.scan.variance)
    files = [write_rows_csv(out / "scan_dataset.csv", ("pose", "pin", "x_mm", "y_mm", "delta_area_mm2"),
                            data.rows())]
    files += write_field(out, "scan_map", hmap)
    if hmap.variance is not None:
        files += write_field(out, "scan_variance", ScalarField(hmap.grid, hmap.variance, "mm^4"))
    _finish(out, "scan", cfg, files, poses=len(spec.poses()), samples=len(data),
            raw_max=hmap.raw_max, gpr_jitter=model.jitter,
            max_delta_area=float(data.delta_area.max()) if len(data) else 0.0)
    print(f"scan: {len(spec.poses())} poses, map raw_max {hmap.raw_max:.4g} mm^2 -> {out}")
    return EXIT_OK


def cmd_explore(cfg: RunConfig, out: Path, snapshots: bool = False) -> int:
    ex = cfg.explore
    stimulus = cfg.stimulus.build()
    start = ex.start(stimulus)
    grid = ex.map_grid()
    # simulate the sensor anywhere over the output map; the walk stops if it
    # tries to leave
    pipe = _pipeline(cfg, [(grid.origin[0], grid.origin[1]), (grid.xmax, grid.ymax), start], stimulus)

    snaps: list[Path] = []
    if snapshots:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(parents=True, exist_ok=True)

        def on_step(state):
            k = state.steps
            m = predict_map(fit_scan(state.samples, sensor=cfg.sensor), grid)
            snaps.append(write_pgm(snap_dir / f"step_{k:03d}.pgm", m.values))
    else:
        on_step = None

    result = explore(pipe, start, ex.max_steps, ex.stop_radius, ex.actions(), cfg.seed, grid,
                     ex.window, ex.threshold, ex.footprint, ex.chase_distance, on_step=on_step)
    st = result.state

    def row(entry):
        cx, cy = entry.centroid if entry.centroid is not None else ("", "")
        mx, my = entry.move if entry.move is not None else ("", "")
        theta = "" if entry.theta is None else entry.theta
        return [entry.step, entry.pose[0], entry.pose[1], cx, cy, theta, mx, my, entry.branch]

    files = [write_rows_csv(out / "trajectory.csv",
                            ("step", "x_mm", "y_mm", "centroid_x", "centroid_y", "theta_deg",
                             "move_x", "move_y", "branch"),
                            (row(e) for e in st.log))]
    if result.map is not None:
        files += write_field(out, "explore_map", result.map)
    _finish(out, "explore", cfg, files + snaps, start=list(start), steps=st.steps,
            poses=len(st.visited), stop_reason=st.stop_reason, lost=st.lost,
            raw_max=None if result.map is None else result.map.raw_max)
    print(f"explore: {st.steps} steps, stopped: {st.stop_reason} -> {out}")
    return EXIT_LOST if st.lost else EXIT_OK


def _check_coverage(fld: ScalarField, ref: ScalarField, name: str):
    g, r = fld.grid, ref.grid
    tol = r.spacing
    if (g.origin[0] < r.origin[0] - tol or g.origin[1] < r.origin[1] - tol
            or g.xmax > r.xmax + tol or g.ymax > r.ymax + tol):
        raise GeometryError(f"reference grid does not cover map {name}; resampling would extrapolate")


def _simulate(cfg: RunConfig, shape: str) -> StimulusResult:
    """Scan one shape; shapes other than the configured one use their standard geometry."""
    stim = cfg.stimulus
    if shape != stim.shape:
        stim = dataclasses.replace(stim, shape=shape, size=None, stm_frequency=None, height=None)
    stimulus = stim.build()
    spec = cfg.scan.build()
    pipe = _pipeline(cfg, spec.poses(), stimulus)
    data = grid_scan(pipe, spec, cfg.seed)
    grid = cfg.scan.map_grid()
    hmap = predict_map(fit_scan(data, sensor=cfg.sensor), grid)
    ref = _on_grid(pipe.pressure, grid)
    length = None if stimulus.path.is_point else path_length(stimulus.path)
    return StimulusResult(shape, hmap, ref, length, float(data.delta_area.max()))


def cmd_compare(cfg: RunConfig, out: Path, maps=(), reference=None, shapes=()) -> int:
    results = []
    ref = read_field_csv(reference) if reference else None
    for path in maps:
        fld = read_field_csv(path)
        name = Path(path).stem
        if ref is not None:
            _check_coverage(fld, ref, name)
        results.append(StimulusResult(name, fld, ref))
    for shape in shapes:
        results.append(_simulate(cfg, shape))
    rep = report(results)
    files = rep.write(out)
    _finish(out, "compare", cfg, files, maps=[str(p) for p in maps],
            reference=None if reference is None else str(reference), shapes=list(shapes))
    print(rep.to_text(), end="")
    return EXIT_OK


def _expand_shapes(names) -> list[str]:
    out = []
    for n in names or ():
        if n == "basic":
            out.extend(BASIC_SHAPES)
        elif n == "extended":
            out.extend(EXTENDED_SHAPES)
        else:
            out.append(n)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key-value run file (INI sections)")
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--out", type=Path, help="output directory (overrides run.out)")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value; repeatable")

    parser = argparse.ArgumentParser(prog="hapticmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="pressure and indentation fields")
    sub.add_parser("scan", parents=[common], help="systematic grid scan and fused map")
    p = sub.add_parser("explore", parents=[common], help="autonomous contour following")
    p.add_argument("--snapshots", action="store_true", help="write one map PGM per step")
    p = sub.add_parser("compare", parents=[common], help="comparison report")
    p.add_argument("maps", nargs="*", type=Path, help="map CSV files to compare")
    p.add_argument("--reference", type=Path, help="reference field CSV (e.g. a synth pressure file)")
    p.add_argument("--shapes", nargs="+", default=[],
                   help="simulate these shapes instead of (or as well as) reading maps; "
                        "'basic' (point, circle) and 'extended' (six path shapes) expand to sets")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = parse_overrides(args.set)
        if args.seed is not None:
            overrides.setdefault("run", {})["seed"] = str(args.seed)
        if args.out is not None:
            overrides.setdefault("run", {})["out"] = str(args.out)
        cfg = load_config(args.config, overrides)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "synth":
            return cmd_synth(cfg, out)
        if args.command == "scan":
            return cmd_scan(cfg, out)
        if args.command == "explore":
            return cmd_explore(cfg, out, args.snapshots)
        shapes = _expand_shapes(args.shapes)
        if not args.maps and not shapes:
            raise ConfigError("compare needs map files or --shapes")
        return cmd_compare(cfg, out, args.maps, args.reference, shapes)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeometryError as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except ValueError as exc:
        # invalid parameter combinations caught below the config layer
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
