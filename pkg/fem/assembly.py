"""
Global assembly, periodic condensation and volume-averaged response
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from core.logger import get_logger
from fem.elements import Tet10
from fem.material import MaterialParams
from fem.mesh import Mesh
from fem.periodic import PeriodicPairing

logger = get_logger(__name__)


@dataclass
class FullSystem:
    """Condensed tangent and residual over the D independent dofs"""

    K_bc: sp.csr_matrix
    g_bc: np.ndarray
    u_tilde: Optional[np.ndarray] = None
    H_bar: Optional[np.ndarray] = None

    @property
    def residual_norm(self) -> float:
        """Infinity norm of g_bc"""
        return float(np.max(np.abs(self.g_bc))) if self.g_bc.size else 0.0


class Assembler:
    """
    Scatter-add of Tet10 kernels for one mesh and material.

    Element geometry and the COO scatter pattern are computed once; every
    call then evaluates the constitutive law at the given state.
    """

    def __init__(self, mesh: Mesh, mat: MaterialParams, quadrature: int = 4):
        self.mesh = mesh
        self.mat = mat
        self.element = Tet10(quadrature)
        self.dNdX, self.dV = self.element.geometry(mesh.nodes[mesh.elements])
        self.el_dofs = (3 * mesh.elements[:, :, None] + np.arange(3)).reshape(-1, 30)
        self.rows = np.repeat(self.el_dofs, 30, axis=1).ravel()
        self.cols = np.tile(self.el_dofs, (1, 30)).ravel()

    @property
    def dof_count(self) -> int:
        return self.mesh.dof_count

    def _gather(self, u_full: np.ndarray) -> np.ndarray:
        return np.asarray(u_full, dtype=float)[self.el_dofs]

    def assemble(self, u_full: np.ndarray, H_bar: np.ndarray) -> Tuple[sp.csr_matrix, np.ndarray]:
        """Global tangent K_full (CSR) and internal force r_full"""
        K_e, f_e = self.element.k_and_f_int(
            self.dNdX, self.dV, self._gather(u_full), H_bar, self.mat
        )
        n = self.dof_count
        K = sp.coo_matrix((K_e.ravel(), (self.rows, self.cols)), shape=(n, n)).tocsr()
        r = np.bincount(self.el_dofs.ravel(), weights=f_e.ravel(), minlength=n)
        return K, r

    def residual(self, u_full: np.ndarray, H_bar: np.ndarray) -> np.ndarray:
        f_e = self.element.f_int(self.dNdX, self.dV, self._gather(u_full), H_bar, self.mat)
        return np.bincount(self.el_dofs.ravel(), weights=f_e.ravel(), minlength=self.dof_count)

    def total_energy(self, u_full: np.ndarray, H_bar: np.ndarray) -> float:
        energy, _ = self.element.energy_and_stress(
            self.dNdX, self.dV, self._gather(u_full), H_bar, self.mat
        )
        return float(energy.sum())

    def volume_average_stress(self, u_full: np.ndarray, H_bar: np.ndarray) -> np.ndarray:
        """P_bar over the full cube volume (voids contribute zero stress)"""
        _, stress = self.element.energy_and_stress(
            self.dNdX, self.dV, self._gather(u_full), H_bar, self.mat
        )
        return stress.sum(axis=0) / self.mesh.edge_length**3

    def solid_volume(self) -> float:
        return float(self.dV.sum())


def assemble(
    mesh: Mesh, u_tilde_full: np.ndarray, H_bar: np.ndarray, mat: MaterialParams
) -> Tuple[sp.csr_matrix, np.ndarray]:
    """One-shot assembly of K_full and r_full"""
    return Assembler(mesh, mat).assemble(u_tilde_full, H_bar)


def apply_periodic(
    K_full: sp.spmatrix,
    r_full: np.ndarray,
    pairing: PeriodicPairing,
    transfer: Optional[sp.csr_matrix] = None,
) -> FullSystem:
    """Condense with T: K_bc = T^T K T, g_bc = T^T r (pinned dofs drop out)"""
    T = pairing.transfer_matrix() if transfer is None else transfer
    Tt = T.T.tocsr()
    K_bc = (Tt @ sp.csr_matrix(K_full) @ T).tocsr()
    g_bc = Tt @ np.asarray(r_full, dtype=float)
    return FullSystem(K_bc=K_bc, g_bc=g_bc)


def total_energy(mesh: Mesh, u_tilde_full: np.ndarray, H_bar: np.ndarray, mat: MaterialParams) -> float:
    """Stored energy integrated over the solid"""
    return Assembler(mesh, mat).total_energy(u_tilde_full, H_bar)


def volume_average_stress(
    mesh: Mesh, u_tilde_full: np.ndarray, H_bar: np.ndarray, mat: MaterialParams
) -> np.ndarray:
    return Assembler(mesh, mat).volume_average_stress(u_tilde_full, H_bar)
