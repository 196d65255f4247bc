"""Standalone readers for the benchmark's public file formats.

This package talks to the denoising toolkit only through its documented
files (result CSV + binary volume), so the formats are parsed here from
their specifications rather than imported.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RESULT_COLUMNS = ("method", "snr", "rep", "mse", "runtime_s")

_MAGIC = b"STVOL1"
_HEADER = struct.Struct("<6sHHII")


@dataclass(frozen=True)
class ResultRow:
    method: str
    snr: float
    rep: int
    mse: float
    runtime_s: float


def read_result_csv(path) -> list[ResultRow]:
    """Parse a benchmark result CSV (method,snr,rep,mse,runtime_s)."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or tuple(reader.fieldnames) != RESULT_COLUMNS:
            raise ValueError(
                f"{path}: expected columns {','.join(RESULT_COLUMNS)}, "
                f"got {reader.fieldnames}")
        for row in reader:
            rows.append(ResultRow(method=row["method"], snr=float(row["snr"]),
                                  rep=int(row["rep"]), mse=float(row["mse"]),
                                  runtime_s=float(row["runtime_s"])))
    return rows


@dataclass(frozen=True)
class Volume:
    d: int
    N: int
    n: int
    data: np.ndarray  # shaped (n, N) or (n, N, N)


def read_volume(path) -> Volume:
    """Parse a binary volume file: 18-byte little-endian header
    (magic, version, d, N, n) followed by n*N**d float64 samples."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: header incomplete")
    magic, version, d, N, n = _HEADER.unpack(raw[: _HEADER.size])
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a volume file (magic {magic!r})")
    if version != 1:
        raise ValueError(f"{path}: unsupported version {version}")
    count = n * N**d
    payload = raw[_HEADER.size:]
    if len(payload) != 8 * count:
        raise ValueError(f"{path}: payload is {len(payload)} bytes, expected {8 * count}")
    data = np.frombuffer(payload, dtype="<f8").reshape((n,) + (N,) * d)
    return Volume(d=d, N=N, n=n, data=data)
