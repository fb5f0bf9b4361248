"""NDJSON diagnostics and binary field dumps."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .fields import DistributionField, FluidField
from .grid import PhaseGrid

MAGIC = b"NSBGK1"
VERSION = 1
_HEADER = struct.Struct("<6sIIII dd")


def record_line(record) -> str:
    return json.dumps(record.to_dict(), allow_nan=False, separators=(",", ":"))


class NDJSONWriter:
    """Writes one JSON object per line, flushing after every record.

    A fresh file is started unless ``append`` is set.
    """

    def __init__(self, path, append=False):
        self.path = Path(path)
        self._fh = open(self.path, "a" if append else "w", encoding="utf-8")

    def write(self, record):
        self._fh.write(record_line(record) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_ndjson(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_fields(path, f: DistributionField, u: FluidField):
    """Header (magic, version, d, N_x, N_v, L, v_max) then f and u as little-endian f64."""
    grid = f.grid
    head = _HEADER.pack(
        MAGIC,
        VERSION,
        grid.dim,
        grid.spatial.cells_per_axis,
        grid.velocity.cells_per_axis,
        grid.spatial.domain_length,
        grid.velocity.v_max,
    )
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_fields(path):
    data = Path(path).read_bytes()
    magic, version, d, nx, nv, L, vmax = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{path}: not a version {VERSION} field dump")
    grid = PhaseGrid.build(d, nx, nv, vmax, L)
    off = _HEADER.size
    nf = int(np.prod(grid.shape))
    nu = d * nx**d
    if len(data) != off + 8 * (nf + nu):
        raise ValueError(f"{path}: truncated payload")
    f = np.frombuffer(data, dtype="<f8", count=nf, offset=off).reshape(grid.shape)
    u = np.frombuffer(data, dtype="<f8", count=nu, offset=off + 8 * nf).reshape((d,) + grid.spatial.shape)
    return DistributionField(grid, f.astype(float)), FluidField(grid.spatial, u.astype(float))
