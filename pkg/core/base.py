"""
Base classes and abstract interfaces: repositories and reduced-order models
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Generic, List, Optional, Tuple, TypeVar

import numpy as np
import scipy.linalg as la

T = TypeVar("T")


class BaseRepository(ABC, Generic[T]):
    """Abstract base repository for artifact persistence"""

    @abstractmethod
    def get(self, name: str) -> T:
        """Load item by name"""

    @abstractmethod
    def save(self, name: str, item: T) -> str:
        """Persist item, returning its location"""

    @abstractmethod
    def exists(self, name: str) -> bool:
        """Check if item exists"""

    @abstractmethod
    def delete(self, name: str) -> bool:
        """Delete item"""

    @abstractmethod
    def list(self) -> List[str]:
        """Names of stored items"""


@dataclass
class ReducedState:
    """Reduced coordinates y and the independent-dof reconstruction u"""

    y: np.ndarray
    u: np.ndarray

    def copy(self) -> "ReducedState":
        return ReducedState(y=self.y.copy(), u=self.u.copy())


@dataclass
class Projection:
    """
    Linear model of one Newton iteration.

    ``V`` (D, q) is the Galerkin projector: K_r = V^T K V and g_r = V^T g.
    A reduced increment z maps to du = V z and to dy = R^-1 z when ``R``
    is set (orthonormalised tangents), else dy = z. ``retried`` marks a
    tangent that needed a widened neighbourhood.
    """

    V: np.ndarray
    R: Optional[np.ndarray] = None
    cluster: Optional[int] = None
    retried: bool = False

    def reduce(self, K, g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        KV = K @ self.V
        K_r = self.V.T @ KV
        return 0.5 * (K_r + K_r.T), self.V.T @ g

    def reduced_residual(self, g: np.ndarray) -> np.ndarray:
        return self.V.T @ g

    def lift(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        dy = z if self.R is None else la.solve_triangular(self.R, z)
        return dy, self.V @ z


class BaseReducer(ABC):
    """Trained reduced-order model driving the shared reduced Newton loop"""

    kind: str = "base"

    @property
    @abstractmethod
    def d(self) -> int:
        """Reduced dimension"""

    @abstractmethod
    def initial_state(self, dof_count: int) -> ReducedState:
        """State of the zero fluctuation"""

    @abstractmethod
    def projection(self, state: ReducedState) -> Projection:
        """Galerkin projector at the current state"""

    def advance(self, state: ReducedState, projection: Projection, z: np.ndarray) -> None:
        """Apply a reduced increment to y and u together"""
        dy, du = projection.lift(z)
        state.y = state.y + dy
        state.u = state.u + du

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "d": self.d}
