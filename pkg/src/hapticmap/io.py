"""Plain-text and image serialization for fields, datasets and manifests.

Field CSV layout::

    origin_x,origin_y,spacing,nx,ny,units[,raw_max]
    <header values>
    <ny rows of nx comma-separated values, lowest y first>

PGM output is binary P5, 16-bit big-endian, scaled so the field maximum maps
to 65535. Image rows run top (highest y) to bottom.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import Grid, HapticMap, IndentationField, PressureField, ScalarField

_FIELD_TYPES = {
    "kPa": PressureField,
    "mm": IndentationField,
    "normalized": HapticMap,
}


def _fmt(v: float) -> str:
    # repr round-trips float64 exactly, which keeps outputs byte-stable
    return repr(float(v))


def write_field_csv(path, fld: ScalarField) -> Path:
    path = Path(path)
    g = fld.grid
    header = ["origin_x", "origin_y", "spacing", "nx", "ny", "units"]
    meta = [_fmt(g.origin[0]), _fmt(g.origin[1]), _fmt(g.spacing), str(g.shape[1]), str(g.shape[0]), fld.units]
    if isinstance(fld, HapticMap):
        header.append("raw_max")
        meta.append(_fmt(fld.raw_max))
    lines = [",".join(header), ",".join(meta)]
    lines.extend(",".join(_fmt(v) for v in row) for row in fld.values)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_field_csv(path) -> ScalarField:
    rows = Path(path).read_text().strip().splitlines()
    if len(rows) < 3:
        raise ValueError(f"{path}: not a field CSV (too few lines)")
    keys = rows[0].split(",")
    meta = dict(zip(keys, rows[1].split(",")))
    try:
        grid = Grid(
            (float(meta["origin_x"]), float(meta["origin_y"])),
            float(meta["spacing"]),
            (int(meta["ny"]), int(meta["nx"])),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing header field {exc}") from None
    values = np.array([[float(v) for v in r.split(",")] for r in rows[2:]])
    units = meta.get("units", "")
    cls = _FIELD_TYPES.get(units, ScalarField)
    if cls is HapticMap:
        return HapticMap(grid, values, raw_max=float(meta.get("raw_max", 0.0)))
    return cls(grid, values, units)


def write_pgm(path, values: np.ndarray) -> Path:
    """16-bit binary PGM, max-scaled; an all-zero field stays black."""
    path = Path(path)
    vals = np.clip(np.asarray(values, dtype=float), 0.0, None)
    vmax = vals.max() if vals.size else 0.0
    scaled = np.zeros_like(vals) if vmax <= 0 else vals / vmax * 65535.0
    img = np.round(scaled[::-1]).astype(">u2")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    """Inverse of :func:`write_pgm` up to scaling; returns rows lowest-y first."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = ">u2" if maxval > 255 else "u1"
    img = np.frombuffer(data[pos:], dtype=dtype, count=w * h).reshape(h, w)
    return img[::-1].astype(float)


def write_field(out_dir, stem: str, fld: ScalarField) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        write_field_csv(out_dir / f"{stem}.csv", fld),
        write_pgm(out_dir / f"{stem}.pgm", fld.values),
    ]


def write_rows_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_manifest(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
