"""File formats: snapshots, diagnostics CSV, growth-curve CSV, JSON reports.

Snapshot files hold one field component at one time.  Both formats start
with the same ASCII header line

    # t=<float> nx=<int> ny=<int> x_min=<float> x_max=<float> y_min=<float>
      y_max=<float> dx=<float> dy=<float>

followed by either CSV rows (``.csv``) or raw little-endian float64 values
in row-major order (``.bin``); the binary form round-trips bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np


def _header(t: float, grid) -> str:
    return (
        f"# t={t!r} nx={grid.nx} ny={grid.ny} "
        f"x_min={grid.x_min!r} x_max={grid.x_max!r} "
        f"y_min={grid.y_min!r} y_max={grid.y_max!r} "
        f"dx={grid.dx!r} dy={grid.dy!r}"
    )


def write_snapshot(path, component: np.ndarray, t: float, grid, fmt: str = "csv"):
    """Write one (time, component) snapshot; format from ``fmt`` (csv or bin)."""
    a = np.ascontiguousarray(component, dtype=np.float64)
    if a.shape != (grid.ny, grid.nx):
        raise ValueError(f"component shape {a.shape} does not match grid ({grid.ny}, {grid.nx})")
    header = _header(t, grid)
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row in a:
                fh.write(",".join(repr(v) for v in row.tolist()) + "\n")
    elif fmt == "bin":
        with open(path, "wb") as fh:
            fh.write((header + "\n").encode("ascii"))
            fh.write(a.astype("<f8").tobytes(order="C"))
    else:
        raise ValueError(f"unknown snapshot format {fmt!r}")


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise ValueError("snapshot file missing header line")
    meta = {}
    for token in line[1:].split():
        key, _, value = token.partition("=")
        meta[key] = int(value) if key in ("nx", "ny") else float(value)
    for key in ("t", "nx", "ny", "x_min", "x_max", "y_min", "y_max", "dx", "dy"):
        if key not in meta:
            raise ValueError(f"snapshot header missing field {key!r}")
    return meta


def read_snapshot(path):
    """Read a snapshot file (format detected from the extension)."""
    path = str(path)
    if path.endswith(".bin"):
        with open(path, "rb") as fh:
            header = fh.readline().decode("ascii").rstrip("\n")
            meta = _parse_header(header)
            data = np.frombuffer(fh.read(), dtype="<f8")
    else:
        with open(path) as fh:
            header = fh.readline().rstrip("\n")
            meta = _parse_header(header)
            data = np.loadtxt(fh, delimiter=",", ndmin=2).ravel()
    expected = meta["nx"] * meta["ny"]
    if data.size != expected:
        raise ValueError(f"snapshot payload has {data.size} values, expected {expected}")
    return meta, data.reshape(meta["ny"], meta["nx"]).copy()


DIAG_COLUMNS = ("t", "linf", "l2", "hmax", "hmin", "kx_dom", "ky_dom", "mode_energy")


def write_diagnostics(path, diagnostics):
    arrays = diagnostics.as_arrays()
    with open(path, "w") as fh:
        fh.write(",".join(DIAG_COLUMNS) + "\n")
        for i in range(arrays["t"].size):
            fh.write(",".join(repr(float(arrays[c][i])) for c in DIAG_COLUMNS) + "\n")


def read_diagnostics(path):
    with open(path) as fh:
        names = fh.readline().rstrip("\n").split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(names)}


def write_growth_curve(path, curve):
    with open(path, "w") as fh:
        fh.write("k,sigma\n")
        for k, s in zip(curve.k_grid.tolist(), curve.sigma.tolist()):
            fh.write(f"{k!r},{s!r}\n")


def to_jsonable(obj):
    """Recursively convert dataclasses, arrays, and complex numbers to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
