"""
Trained reduced-order models: POD, clustered local POD, manifold and two-stage
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from core.base import BaseReducer, Projection, ReducedState
from core.logger import get_logger
from exceptions import InvalidParameterError, SingularNeighborhoodError
from models import Linearisation
from reduction.clustering import LpodModel
from reduction.linearisation import LocalTangent, local_linearise

logger = get_logger(__name__)


@dataclass
class PodRom(BaseReducer):
    """Global linear basis psi (D, d)"""

    psi: np.ndarray
    kind: str = "pod"

    @property
    def d(self) -> int:
        return int(self.psi.shape[1])

    def initial_state(self, dof_count: int) -> ReducedState:
        return ReducedState(y=np.zeros(self.d), u=np.zeros(dof_count))

    def projection(self, state: ReducedState) -> Projection:
        return Projection(V=self.psi)


@dataclass
class LpodRom(BaseReducer):
    """Local bases selected by the centroid nearest to the current solution"""

    model: LpodModel
    kind: str = "lpod"

    @property
    def d(self) -> int:
        return max(basis.d for basis in self.model.bases)

    def initial_state(self, dof_count: int) -> ReducedState:
        return ReducedState(y=np.zeros(0), u=np.zeros(dof_count))

    def projection(self, state: ReducedState) -> Projection:
        cluster = self.model.nearest_cluster(state.u)
        return Projection(V=self.model.bases[cluster].psi, cluster=cluster)

    def advance(self, state: ReducedState, projection: Projection, z: np.ndarray) -> None:
        state.u = state.u + projection.V @ z

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "d": self.d,
            "k": self.model.k,
            "local_d": [basis.d for basis in self.model.bases],
        }


@dataclass
class ManlRom(BaseReducer):
    """
    Manifold-learning model in an ambient snapshot space.

    ``U_ambient`` (m, s) holds the snapshots the embedding Y (d, s) was
    learned from. For single-stage models m = D; two-stage models carry the
    stage-one basis ``psi_outer`` (D, m) and m = d_bar. Global models use the
    fixed orthonormal map ``psi_global`` (m, d) instead of local tangents.
    """

    U_ambient: np.ndarray
    Y: np.ndarray
    method: str
    n_lin: int = 20
    orthonormalise: bool = True
    linearisation: Linearisation = Linearisation.LOCAL
    psi_outer: Optional[np.ndarray] = None
    psi_global: Optional[np.ndarray] = None
    graph_params: Dict[str, Any] = field(default_factory=dict)
    kind: str = "manl"

    def __post_init__(self):
        self.linearisation = Linearisation(self.linearisation)
        if self.U_ambient.shape[1] != self.Y.shape[1]:
            raise InvalidParameterError(
                "Embedding and snapshots differ in column count",
                context={"U": list(self.U_ambient.shape), "Y": list(self.Y.shape)},
            )
        if self.linearisation == Linearisation.GLOBAL and self.psi_global is None:
            raise InvalidParameterError("Global models need psi_global")

    @property
    def d(self) -> int:
        return int(self.Y.shape[0])

    @property
    def snapshot_count(self) -> int:
        return int(self.Y.shape[1])

    @property
    def two_stage(self) -> bool:
        return self.psi_outer is not None

    def _lift_basis(self, basis: np.ndarray) -> np.ndarray:
        return basis if self.psi_outer is None else self.psi_outer @ basis

    def initial_state(self, dof_count: int) -> ReducedState:
        if self.linearisation == Linearisation.GLOBAL:
            return ReducedState(y=np.zeros(self.d), u=np.zeros(dof_count))
        return ReducedState(y=self.Y[:, 0].copy(), u=np.zeros(dof_count))

    def tangent(self, y: np.ndarray) -> Tuple[LocalTangent, bool]:
        """
        Local tangent at y and whether it needed a retry. An ill-conditioned
        neighbourhood is retried once with twice the neighbours; n_lin <= d
        cannot span the reduced space and fails without a retry.
        """
        if self.n_lin <= self.d:
            raise SingularNeighborhoodError(
                "Linearisation needs more neighbours than reduced dimensions",
                context={"n_lin": self.n_lin, "d": self.d},
            )
        try:
            return local_linearise(y, self.Y, self.U_ambient, self.n_lin), False
        except SingularNeighborhoodError as e:
            widened = min(2 * self.n_lin, self.snapshot_count)
            if widened <= self.n_lin:
                raise
            logger.warning(
                "Singular neighbourhood, retrying with more neighbours",
                extra={"n_lin": self.n_lin, "retry_n": widened, "reason": e.message},
            )
            return local_linearise(y, self.Y, self.U_ambient, widened), True

    def projection(self, state: ReducedState) -> Projection:
        if self.linearisation == Linearisation.GLOBAL:
            return Projection(V=self._lift_basis(self.psi_global))
        tangent, retried = self.tangent(state.y)
        if self.orthonormalise:
            return Projection(
                V=self._lift_basis(tangent.phi_perp), R=tangent.R_perp, retried=retried
            )
        return Projection(V=self._lift_basis(tangent.phi), retried=retried)

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "d": self.d,
            "method": self.method,
            "n_lin": self.n_lin,
            "orthonormalise": self.orthonormalise,
            "linearisation": self.linearisation.value,
            "two_stage": self.two_stage,
            "d_bar": int(self.U_ambient.shape[0]) if self.two_stage else None,
            "graph": self.graph_params,
        }


@dataclass
class TwoStageRom(ManlRom):
    """Manifold model learned on stage-one POD coordinates Y_bar = psi^T U"""

    kind: str = "two_stage"

    def __post_init__(self):
        super().__post_init__()
        if self.psi_outer is None:
            raise InvalidParameterError("Two-stage models need the stage-one basis")

    @property
    def d_bar(self) -> int:
        return int(self.psi_outer.shape[1])

    @property
    def Y_bar(self) -> np.ndarray:
        return self.U_ambient
