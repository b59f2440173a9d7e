"""Dense matrix export: a small binary format and CSV.

Binary layout, all little-endian: 4-byte magic ``b"PQQM"``, u32 rows,
u32 cols, u32 reserved (zero, pads the header to 16 bytes), then
``rows * cols`` float64 values in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ParameterError

MAGIC = b"PQQM"
HEADER = struct.Struct("<4sIII")


def matrix_to_bytes(A) -> bytes:
    A = np.asarray(A, dtype="<f8")
    if A.ndim != 2:
        raise ParameterError(f"expected a 2-D matrix, got shape {A.shape}")
    return HEADER.pack(MAGIC, A.shape[0], A.shape[1], 0) + np.ascontiguousarray(A).tobytes()


def matrix_from_bytes(data: bytes) -> np.ndarray:
    if len(data) < HEADER.size:
        raise ParameterError("truncated matrix header")
    magic, rows, cols, _ = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParameterError(f"bad magic {magic!r}")
    body = data[HEADER.size :]
    if len(body) != 8 * rows * cols:
        raise ParameterError(f"expected {8 * rows * cols} payload bytes, got {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(float)


def write_matrix(path, A) -> None:
    Path(path).write_bytes(matrix_to_bytes(A))


def read_matrix(path) -> np.ndarray:
    return matrix_from_bytes(Path(path).read_bytes())


def write_matrix_csv(path, A) -> None:
    np.savetxt(path, np.asarray(A, dtype=float), delimiter=",", fmt="%.12g")


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


__all__ = ["matrix_to_bytes", "matrix_from_bytes", "read_matrix", "write_matrix", "read_matrix_csv", "write_matrix_csv"]
