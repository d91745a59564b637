"""Field dump format and CSV export.

A dump is one ASCII header line::

    APFCFIELD v1 <name> <nx> <ny> <lx> <ly> <real|complex>

followed by ``nx*ny`` row-major little-endian float64 values (``re, im``
pairs for complex fields). Row-major means index ``[ix, iy]`` with ``iy``
varying fastest.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .fields import Grid2D

MAGIC = "APFCFIELD"
VERSION = "v1"


class DumpFormatError(ValueError):
    pass


def write_field(path, name: str, grid: Grid2D, values: np.ndarray) -> Path:
    if any(c.isspace() for c in name) or not name:
        raise ValueError(f"field name must be a non-empty token, got {name!r}")
    grid.check(values)
    values = np.asarray(values)
    kind = "complex" if np.iscomplexobj(values) else "real"
    dtype = "<c16" if kind == "complex" else "<f8"
    header = f"{MAGIC} {VERSION} {name} {grid.nx} {grid.ny} {grid.lx!r} {grid.ly!r} {kind}\n"
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(values, dtype=dtype).tobytes())
    return path


def read_field(path) -> tuple[str, Grid2D, np.ndarray]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        payload = fh.read()
    if len(header) != 8 or header[0] != MAGIC:
        raise DumpFormatError(f"{path}: not an {MAGIC} dump")
    if header[1] != VERSION:
        raise DumpFormatError(f"{path}: unsupported version {header[1]}")
    _, _, name, nx, ny, lx, ly, kind = header
    grid = Grid2D(float(lx), float(ly), int(nx), int(ny))
    if kind not in ("real", "complex"):
        raise DumpFormatError(f"{path}: unknown kind {kind!r}")
    dtype = "<c16" if kind == "complex" else "<f8"
    expected = grid.nx * grid.ny * np.dtype(dtype).itemsize
    if len(payload) != expected:
        raise DumpFormatError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype=dtype).reshape(grid.shape).astype(
        complex if kind == "complex" else float
    )
    return name, grid, values


def write_field_csv(path, grid: Grid2D, values: np.ndarray, name: str = "value") -> Path:
    """``x,y,<name>`` rows; intended for small fields."""
    grid.check(values)
    X, Y = grid.coords
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", name])
        for x, y, v in zip(X.ravel(), Y.ravel(), np.asarray(values).ravel()):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(np.real(v)))])
    return path


def write_profile_csv(path, x, apfc, analytic=None) -> Path:
    """Profile CSV with header ``x,sigma_yy_apfc[,sigma_yy_analytic]``."""
    path = Path(path)
    cols = [np.asarray(x), np.asarray(apfc)]
    header = ["x", "sigma_yy_apfc"]
    if analytic is not None:
        cols.append(np.asarray(analytic))
        header.append("sigma_yy_analytic")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
    return path


def read_profile_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {h: data[:, i] for i, h in enumerate(header)}
