"""
MOR1 binary matrix container

Layout: 4-byte magic ``MOR1``, u32 little-endian rows, u32 little-endian
cols, then rows * cols IEEE-754 float64 values (little-endian, row-major).
"""

import struct
from pathlib import Path
from typing import Union

import numpy as np

from exceptions import InvalidParameterError, ResourceNotFoundError

MAGIC = b"MOR1"
HEADER = struct.Struct("<4sII")


def encode_matrix(matrix: np.ndarray) -> bytes:
    matrix = np.asarray(matrix, dtype="<f8")
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        raise InvalidParameterError("Only 1-D or 2-D arrays fit the container")
    rows, cols = matrix.shape
    return HEADER.pack(MAGIC, rows, cols) + np.ascontiguousarray(matrix).tobytes(order="C")


def decode_matrix(payload: bytes) -> np.ndarray:
    if len(payload) < HEADER.size:
        raise InvalidParameterError("Container shorter than its header")
    magic, rows, cols = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise InvalidParameterError("Not a MOR1 container", context={"magic": magic.hex()})
    expected = HEADER.size + 8 * rows * cols
    if len(payload) != expected:
        raise InvalidParameterError(
            "Container size does not match its header",
            context={"rows": rows, "cols": cols, "bytes": len(payload)},
        )
    data = np.frombuffer(payload, dtype="<f8", offset=HEADER.size, count=rows * cols)
    return data.reshape(rows, cols).astype(float)


def write_matrix(path: Union[str, Path], matrix: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_matrix(matrix))
    return path


def read_matrix(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ResourceNotFoundError("Matrix file not found", context={"path": str(path)})
    return decode_matrix(path.read_bytes())
