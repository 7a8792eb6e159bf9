"""
Helper functions and utilities
"""

import copy
import json
import time
from typing import Any, Dict, Iterable, Optional

import numpy as np

from exceptions import InvalidParameterError


class RngStream:
    """Seeded random stream; identical seeds give identical draws"""

    algorithm = "PCG64"

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def choice(self, n: int, size: int) -> np.ndarray:
        """``size`` distinct indices from range(n)"""
        return self._generator.choice(n, size=size, replace=False)

    def standard_normal(self, shape) -> np.ndarray:
        return self._generator.standard_normal(shape)

    def uniform(self, low: float, high: float, shape) -> np.ndarray:
        return self._generator.uniform(low, high, shape)

    def to_dict(self) -> Dict[str, Any]:
        return {"seed": self.seed, "algorithm": self.algorithm}


class DictHelper:
    """Dictionary helper functions"""

    @staticmethod
    def deep_get(dictionary: Dict, *keys, default: Any = None) -> Any:
        """Get nested dictionary value safely"""
        current = dictionary
        for key in keys:
            if isinstance(current, dict) and key in current:
                current = current[key]
            else:
                return default
        return current

    @staticmethod
    def deep_set(dictionary: Dict, keys: Iterable[str], value: Any) -> Dict:
        """Set a nested value, creating intermediate dicts; list items by index"""
        keys = list(keys)
        current = dictionary
        for key in keys[:-1]:
            if isinstance(current, list):
                current = current[int(key)]
                continue
            if not isinstance(current.get(key), (dict, list)):
                current[key] = {}
            current = current[key]
        if isinstance(current, list):
            current[int(keys[-1])] = value
        else:
            current[keys[-1]] = value
        return dictionary

    @staticmethod
    def parse_value(text: str) -> Any:
        """JSON literal when it parses, plain string otherwise"""
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            return text

    @staticmethod
    def apply_overrides(dictionary: Dict, overrides: Optional[Iterable[str]]) -> Dict:
        """Apply ``a.b.c=value`` overrides to a deep copy of ``dictionary``"""
        result = copy.deepcopy(dictionary)
        for item in overrides or []:
            key, sep, raw = item.partition("=")
            if not sep or not key.strip():
                raise InvalidParameterError(
                    "Override must look like key.path=value", context={"override": item}
                )
            try:
                DictHelper.deep_set(result, key.strip().split("."), DictHelper.parse_value(raw))
            except (IndexError, ValueError, TypeError) as e:
                raise InvalidParameterError(
                    f"Cannot apply override: {e}", context={"override": item}
                ) from e
        return result


class Timer:
    """Context manager measuring wall time in seconds"""

    def __init__(self):
        self.elapsed = 0.0
        self._start: Optional[float] = None

    def __enter__(self) -> "Timer":
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc) -> None:
        self.elapsed = time.perf_counter() - self._start
