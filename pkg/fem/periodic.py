"""
Periodic boundary pairing and the condensation map of the fluctuation field
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from core.logger import get_logger
from exceptions import UnmatchedBoundaryNodeError
from fem.mesh import Mesh

logger = get_logger(__name__)


@dataclass
class PeriodicPairing:
    """
    Split of the full fluctuation dofs into independent and dependent sets.

    ``master_of`` maps every node to the node carrying its independent dofs
    (itself for interior and minus-face nodes). The pinned node is the master
    corner at the origin; its three dofs are fixed to zero.
    ``full_to_reduced`` holds, per full dof, its independent index or -1.
    """

    master_of: np.ndarray
    pinned_node: int
    independent_dofs: np.ndarray
    dependent_dofs: np.ndarray
    partner_dofs: np.ndarray
    full_to_reduced: np.ndarray

    @property
    def dof_count(self) -> int:
        """D, the number of independent dofs"""
        return int(self.independent_dofs.size)

    @property
    def full_dof_count(self) -> int:
        return int(self.full_to_reduced.size)

    @property
    def pinned_dof_block(self) -> np.ndarray:
        return 3 * self.pinned_node + np.arange(3)

    @property
    def partner_of(self) -> Dict[int, int]:
        return dict(zip(self.dependent_dofs.tolist(), self.partner_dofs.tolist()))

    def transfer_matrix(self) -> sp.csr_matrix:
        """Sparse T (full x D) with u_full = T u_indep"""
        rows = np.flatnonzero(self.full_to_reduced >= 0)
        cols = self.full_to_reduced[rows]
        return sp.coo_matrix(
            (np.ones(rows.size), (rows, cols)),
            shape=(self.full_dof_count, self.dof_count),
        ).tocsr()

    def expand(self, u_indep: np.ndarray) -> np.ndarray:
        """Full fluctuation vector (or column block) from independent dofs"""
        u_indep = np.asarray(u_indep, dtype=float)
        padded = np.concatenate([u_indep, np.zeros((1,) + u_indep.shape[1:])], axis=0)
        gather = np.where(self.full_to_reduced >= 0, self.full_to_reduced, self.dof_count)
        return padded[gather]

    def restrict(self, u_full: np.ndarray) -> np.ndarray:
        """Independent dofs of a periodic full vector"""
        return np.asarray(u_full, dtype=float)[self.independent_dofs]

    def to_dict(self) -> Dict:
        return {
            "master_of": self.master_of.tolist(),
            "pinned_node": int(self.pinned_node),
        }

    @classmethod
    def from_master_map(cls, master_of: np.ndarray, pinned_node: int) -> "PeriodicPairing":
        """Rebuild all dof index sets from the node master map"""
        master_of = np.asarray(master_of, dtype=np.int64)
        nodes = np.arange(master_of.size)
        components = np.arange(3)
        masters = nodes[(master_of == nodes) & (nodes != pinned_node)]

        slot_of_node = -np.ones(master_of.size, dtype=np.int64)
        slot_of_node[masters] = np.arange(masters.size)
        slot = slot_of_node[master_of]
        full_to_reduced = np.where(
            slot[:, None] >= 0, 3 * slot[:, None] + components, -1
        ).ravel()

        dependents = nodes[master_of != nodes]
        return cls(
            master_of=master_of,
            pinned_node=int(pinned_node),
            independent_dofs=(3 * masters[:, None] + components).ravel(),
            dependent_dofs=(3 * dependents[:, None] + components).ravel(),
            partner_dofs=(3 * master_of[dependents][:, None] + components).ravel(),
            full_to_reduced=full_to_reduced,
        )


def build_periodic_pairing(mesh: Mesh, rtol: float = 1e-9) -> PeriodicPairing:
    """
    Pair plus-face nodes with their minus-face partners.

    Coordinates on a plus face are shifted back by one edge length per axis,
    so edge and corner nodes collapse onto the single minimum-coordinate
    master node.
    """
    length = mesh.edge_length
    tol = rtol * length
    shifted = np.where(mesh.nodes >= length - tol, mesh.nodes - length, mesh.nodes)

    tree = cKDTree(mesh.nodes)
    dist, idx = tree.query(shifted, k=1, distance_upper_bound=tol)
    missing = ~np.isfinite(dist)
    if np.any(missing):
        node = int(np.argmax(missing))
        raise UnmatchedBoundaryNodeError(
            "Plus-face node has no periodic partner",
            context={"node": node, "coords": mesh.nodes[node].tolist()},
        )

    dist0, origin = tree.query(np.zeros(3), k=1, distance_upper_bound=tol)
    if not np.isfinite(dist0):
        raise UnmatchedBoundaryNodeError("No node at the master corner (0, 0, 0)")

    pairing = PeriodicPairing.from_master_map(idx.astype(np.int64), int(origin))
    logger.debug(
        "Built periodic pairing",
        extra={
            "independent_dofs": pairing.dof_count,
            "dependent_dofs": int(pairing.dependent_dofs.size),
        },
    )
    return pairing
