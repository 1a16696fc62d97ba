"""On-disk formats: binary field grids, observation CSV, key-value manifests.

Field files carry a fixed 32-byte little-endian header

    bytes 0-3   magic b"FGRD"
    bytes 4-7   format version (uint32, currently 1)
    bytes 8-11  grid resolution n (uint32)
    bytes 12-15 component count (uint32)
    bytes 16-23 model time (float64)
    bytes 24-31 reserved (zeros)

followed by n*n*components float64 values in C order with the x index
leading.  Readers validate the header byte-exactly and the total length.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from floeda.fields import FieldGrid

__all__ = [
    "FieldFormatError",
    "write_field",
    "read_field",
    "write_observations_csv",
    "read_observations_csv",
    "write_kv",
    "read_kv",
]

MAGIC = b"FGRD"
VERSION = 1
_HEADER = struct.Struct("<4sIIId8s")
assert _HEADER.size == 32


class FieldFormatError(ValueError):
    pass


def write_field(path, field: FieldGrid) -> None:
    data = np.ascontiguousarray(field.values, dtype="<f8")
    header = _HEADER.pack(MAGIC, VERSION, field.n, field.ncomp, field.time, b"\x00" * 8)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_field(path) -> FieldGrid:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, n, ncomp, time, reserved = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported version {version}")
    if n < 2 or ncomp < 1:
        raise FieldFormatError(f"{path}: invalid dimensions n={n} components={ncomp}")
    expected = _HEADER.size + 8 * n * n * ncomp
    if len(raw) != expected:
        raise FieldFormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, n, ncomp)
    return FieldGrid(data.copy(), time=time)


def write_observations_csv(path, records) -> None:
    """records: iterable of (time, floe_id, x, y)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "floe_id", "x", "y"])
        for time, floe_id, x, y in records:
            writer.writerow([f"{time:.10g}", int(floe_id), f"{x:.17g}", f"{y:.17g}"])


def read_observations_csv(path):
    """Returns (times, floe_ids, positions) arrays sorted as stored."""
    times, ids, xs, ys = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["time", "floe_id", "x", "y"]:
            raise FieldFormatError(f"{path}: unexpected observation header {header}")
        for row in reader:
            times.append(float(row[0]))
            ids.append(int(row[1]))
            xs.append(float(row[2]))
            ys.append(float(row[3]))
    return np.array(times), np.array(ids, dtype=np.intp), np.column_stack([xs, ys]) if xs else np.empty((0, 2))


def write_kv(path, mapping) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in mapping.items():
            fh.write(f"{key} = {val}\n")


def read_kv(path) -> dict:
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out
