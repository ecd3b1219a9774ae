"""Distribution snapshots.

CSV: first line ``N,n,R``, second line their values, then the grid values in
row-major (C) order, one per line.

Binary (little-endian): int32 N, int32 n, float64 R, then n**N float64
values in row-major order.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .state import Distribution, VelocityGrid

_HEADER = struct.Struct("<iid")


def write_snapshot(path, grid: VelocityGrid, values: np.ndarray, fmt: str | None = None):
    path = Path(path)
    fmt = fmt or ("bin" if path.suffix == ".bin" else "csv")
    values = np.asarray(values, dtype=float).reshape(grid.shape)
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(grid.N, grid.n, grid.R))
            fh.write(values.astype("<f8").tobytes(order="C"))
    elif fmt == "csv":
        with open(path, "w") as fh:
            fh.write("N,n,R\n")
            fh.write(f"{grid.N},{grid.n},{grid.R!r}\n")
            for v in values.ravel():
                fh.write(f"{float(v)!r}\n")
    else:
        raise ValueError(f"unknown snapshot format {fmt!r}")


def read_snapshot(path) -> tuple[VelocityGrid, np.ndarray]:
    """Grid and raw values (which may be signed, e.g. a collision output)."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head.startswith(b"N,n"):
        with open(path) as fh:
            fh.readline()
            N, n, R = fh.readline().strip().split(",")
            grid = VelocityGrid(int(N), int(n), float(R))
            vals = np.loadtxt(fh, dtype=float, ndmin=1)
    else:
        raw = path.read_bytes()
        N, n, R = _HEADER.unpack_from(raw)
        grid = VelocityGrid(N, n, R)
        vals = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if vals.size != grid.n ** grid.N:
        raise ValueError(f"snapshot holds {vals.size} values, expected {grid.n ** grid.N}")
    return grid, vals.reshape(grid.shape).astype(float)


def read_distribution(path) -> Distribution:
    grid, vals = read_snapshot(path)
    return Distribution(grid, vals)
