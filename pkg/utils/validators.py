"""
Input validation utilities for arrays and numeric parameters
"""

from typing import Sequence

import numpy as np

from exceptions import InvalidParameterError


class ArrayValidator:
    """Utility class for array validation"""

    @staticmethod
    def validate_matrix(matrix, name: str, min_cols: int = 1) -> np.ndarray:
        """2-D finite float array with at least ``min_cols`` columns"""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise InvalidParameterError(
                f"{name} must be 2-D", context={"shape": list(matrix.shape)}
            )
        if matrix.shape[1] < min_cols:
            raise InvalidParameterError(
                f"{name} needs at least {min_cols} columns",
                context={"shape": list(matrix.shape)},
            )
        if not np.all(np.isfinite(matrix)):
            raise InvalidParameterError(f"{name} has non-finite entries")
        return matrix

    @staticmethod
    def validate_gradient(H) -> np.ndarray:
        """3x3 finite displacement gradient"""
        H = np.asarray(H, dtype=float)
        if H.shape != (3, 3):
            raise InvalidParameterError(
                "Displacement gradient must be 3x3", context={"shape": list(H.shape)}
            )
        if not np.all(np.isfinite(H)):
            raise InvalidParameterError("Displacement gradient has non-finite entries")
        return H

    @staticmethod
    def validate_same_length(first: Sequence, second: Sequence, name: str) -> int:
        if len(first) != len(second):
            raise InvalidParameterError(
                f"{name}: length mismatch",
                context={"first": len(first), "second": len(second)},
            )
        return len(first)

