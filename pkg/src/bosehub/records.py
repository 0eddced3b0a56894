"""Plain-file writers and readers.

Every numeric writer here has a matching reader that recovers the payload
bit-exactly: CSV uses 17 significant digits, key-value records keep
``repr`` of floats, and state vectors are raw little-endian doubles.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .fock import ORDER_TAG

__all__ = [
    "NA",
    "format_float",
    "read_csv",
    "read_kv",
    "read_state",
    "write_csv",
    "write_kv",
    "write_state",
]

NA = "n/a"
_STATE_MAGIC = b"BHSTATE1"
_HEADER = struct.Struct("<8sQII8s")


def format_float(x) -> str:
    if x is None:
        return NA
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> None:
    """Write `rows` under a one-line `header`; ``None`` cells become ``n/a``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if v is None or isinstance(v, (float, np.floating))
                        else v for v in row])


def read_csv(path):
    """Return ``(header, data)`` with `data` a float array; ``n/a`` reads as NaN."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[np.nan if v == NA else float(v) for v in row] for row in r]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def _kv_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, np.ndarray):
        return " ".join(format_float(x) for x in v.ravel())
    if v is None:
        return NA
    return str(v).replace("\n", " ")


def write_kv(path, record: dict) -> None:
    """One ``key = value`` line per entry, insertion order preserved."""
    lines = []
    for k, v in record.items():
        if "=" in str(k) or "\n" in str(k):
            raise ValueError(f"invalid key {k!r}")
        lines.append(f"{k} = {_kv_value(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_kv(path) -> dict:
    """Inverse of :func:`write_kv`; values are returned as strings."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        k, _, v = line.partition(" = ")
        out[k] = v
    return out


def write_state(path, psi, L: int, N: int) -> None:
    """Raw state vector: fixed header (magic, dim, L, N, basis-order tag) then
    little-endian float64 amplitudes in the lexicographic-descending basis."""
    psi = np.ascontiguousarray(psi, dtype="<f8")
    tag = ORDER_TAG.encode().ljust(8, b"\0")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_STATE_MAGIC, psi.size, L, N, tag))
        fh.write(psi.tobytes())


def read_state(path):
    """Return ``(psi, L, N)`` from a file written by :func:`write_state`."""
    raw = Path(path).read_bytes()
    magic, dim, L, N, tag = _HEADER.unpack_from(raw)
    if magic != _STATE_MAGIC:
        raise ValueError(f"{path}: not a state file")
    if tag.rstrip(b"\0").decode() != ORDER_TAG:
        raise ValueError(f"{path}: unknown basis order {tag!r}")
    psi = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=dim).copy()
    return psi, L, N
