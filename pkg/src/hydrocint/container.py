"""HCF1 field container: JSON header + raw little-endian float64 samples.

Layout: 4-byte magic ``HCF1``, 4-byte little-endian uint32 giving the
padded header length, the UTF-8 JSON header, space padding so that the
data section starts on a 64-byte boundary, then the physical samples in
row-major (C) order, one component after another.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .grid import TorusField, TorusGrid

MAGIC = b"HCF1"


def write_field(path, field: TorusField) -> None:
    header = {
        "dims": list(field.grid.dims),
        "axis_roles": list(field.grid.axis_roles),
        "rank": field.rank,
        "ncomp": field.ncomp,
        "endianness": "<f8",
    }
    raw = json.dumps(header, separators=(",", ":")).encode()
    prefix = len(MAGIC) + 4
    total = prefix + len(raw)
    padded_total = ((total + 63) // 64) * 64
    pad = padded_total - total
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(raw) + pad))
        fh.write(raw)
        fh.write(b" " * pad)
        fh.write(np.ascontiguousarray(field.data, dtype="<f8").tobytes())


def read_field(path) -> TorusField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not an HCF1 file (magic {magic!r})")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        if header.get("endianness") != "<f8":
            raise ValueError("unsupported sample encoding")
        grid = TorusGrid(tuple(header["dims"]), tuple(header["axis_roles"]))
        ncomp = int(header["ncomp"])
        count = ncomp * grid.npoints
        data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
        data = data.reshape((ncomp,) + grid.dims).astype(float)
        return TorusField(grid, header["rank"], data)
