"""EVF1 field snapshot files.

Layout (all integers unsigned 32-bit, all floats 64-bit, little-endian)::

    b"EVF1"
    dim
    n_1 ... n_dim
    L_1 ... L_dim
    label_length, label bytes (UTF-8)
    samples, row-major (C order), float64

One file holds one scalar field; vector fields are written one component
per file.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Grid

MAGIC = b"EVF1"


def write_field(path, grid, values, label=""):
    values = grid.check_scalar(values)
    lab = label.encode("utf-8")
    head = MAGIC + struct.pack("<I", grid.dim)
    head += struct.pack(f"<{grid.dim}I", *grid.n)
    head += struct.pack(f"<{grid.dim}d", *grid.L)
    head += struct.pack("<I", len(lab)) + lab
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes(order="C"))
    return path


def read_field(path):
    """Read an EVF1 file; returns ``(grid, values, label)``."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not an EVF1 file (magic {data[:4]!r})")
    off = 4
    (dim,) = struct.unpack_from("<I", data, off)
    off += 4
    n = struct.unpack_from(f"<{dim}I", data, off)
    off += 4 * dim
    L = struct.unpack_from(f"<{dim}d", data, off)
    off += 8 * dim
    (nlab,) = struct.unpack_from("<I", data, off)
    off += 4
    label = data[off:off + nlab].decode("utf-8")
    off += nlab
    grid = Grid(dim=dim, n=tuple(n), L=tuple(L))
    expected = 8 * grid.size
    if len(data) - off != expected:
        raise ValueError(f"{path}: expected {expected} sample bytes, found {len(data) - off}")
    values = np.frombuffer(data, dtype="<f8", offset=off).reshape(grid.shape).astype(float)
    return grid, values, label
