"""
Snapshot POD through the method of snapshots
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np
import scipy.linalg as la

from core.logger import get_logger
from exceptions import InvalidParameterError, RankDeficientError

logger = get_logger(__name__)

RANK_RTOL = 1e-12


@dataclass
class SnapshotSet:
    """Independent-dof fluctuation snapshots (D, s); column 0 is the zero state"""

    U: np.ndarray
    meta: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        if self.U.ndim != 2 or self.U.shape[1] < 2:
            raise InvalidParameterError(
                "Snapshot matrix must be 2-D with at least two columns",
                context={"shape": list(self.U.shape)},
            )
        if not np.all(np.isfinite(self.U)):
            raise InvalidParameterError("Snapshot matrix has non-finite entries")

    @property
    def dof_count(self) -> int:
        return int(self.U.shape[0])

    @property
    def count(self) -> int:
        return int(self.U.shape[1])


@dataclass
class PodBasis:
    """Orthonormal basis psi (D, d) with the descending covariance spectrum"""

    psi: np.ndarray
    eigenvalues: np.ndarray

    @property
    def d(self) -> int:
        return int(self.psi.shape[1])

    def project(self, u: np.ndarray) -> np.ndarray:
        return self.psi.T @ u

    def reconstruct(self, y: np.ndarray) -> np.ndarray:
        return self.psi @ y


def _as_matrix(U: Union[SnapshotSet, np.ndarray]) -> np.ndarray:
    return U.U if isinstance(U, SnapshotSet) else np.asarray(U, dtype=float)


def covariance_spectrum(U: Union[SnapshotSet, np.ndarray]):
    """Descending eigenpairs of C = U^T U / (s - 1), tiny negatives clamped"""
    U = _as_matrix(U)
    s = U.shape[1]
    C = U.T @ U / max(s - 1, 1)
    lam, V = la.eigh(C)
    lam, V = lam[::-1], V[:, ::-1]
    scale = max(1.0, float(lam[0])) if lam.size else 1.0
    if lam.size and lam[-1] < -RANK_RTOL * scale:
        raise InvalidParameterError(
            "Snapshot covariance is not positive semidefinite",
            context={"min_eigenvalue": float(lam[-1])},
        )
    return np.clip(lam, 0.0, None), V


def numerical_rank(eigenvalues: np.ndarray) -> int:
    if eigenvalues.size == 0 or eigenvalues[0] <= 0.0:
        return 0
    return int(np.count_nonzero(eigenvalues >= RANK_RTOL * eigenvalues[0]))


def dimension_for_ratio(eigenvalues: np.ndarray, ratio: float) -> int:
    """Smallest d whose cumulative eigenvalue fraction exceeds ``ratio``"""
    if not 0.0 < ratio <= 1.0:
        raise InvalidParameterError("information ratio must lie in (0, 1]", context={"ratio": ratio})
    rank = numerical_rank(eigenvalues)
    total = eigenvalues.sum()
    if total <= 0.0:
        return rank
    cumulative = np.cumsum(eigenvalues) / total
    above = np.flatnonzero(cumulative > ratio)
    return min(int(above[0]) + 1, rank) if above.size else rank


def orthonormalise(Q: np.ndarray) -> np.ndarray:
    """Reduced QR with the sign convention diag(R) >= 0"""
    Q, R = la.qr(Q, mode="economic")
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    return Q * signs


def snapshot_pod(
    U: Union[SnapshotSet, np.ndarray],
    d: Optional[int] = None,
    ratio: Optional[float] = None,
) -> PodBasis:
    """
    POD basis from the snapshot covariance.

    Exactly one of ``d`` (fixed size) or ``ratio`` (information content) is
    used. Modes are mapped back through U and re-orthonormalised.
    """
    if (d is None) == (ratio is None):
        raise InvalidParameterError("Give exactly one of d or ratio")
    U = _as_matrix(U)
    lam, V = covariance_spectrum(U)
    rank = numerical_rank(lam)
    if ratio is not None:
        d = dimension_for_ratio(lam, ratio)
    if d < 1 or d > rank:
        raise RankDeficientError(
            "Requested dimension exceeds the numerical rank",
            context={"d": d, "rank": rank},
        )

    modes = U @ V[:, :d]
    modes /= np.linalg.norm(modes, axis=0)
    psi = orthonormalise(modes)
    logger.debug("Computed POD basis", extra={"d": d, "rank": rank})
    return PodBasis(psi=psi, eigenvalues=lam)


def projection_error(
    U: Union[SnapshotSet, np.ndarray], psi: np.ndarray, center: Optional[np.ndarray] = None
) -> float:
    """||(U - c) - psi psi^T (U - c)||_F / ||U||_F"""
    U = _as_matrix(U)
    norm = np.linalg.norm(U)
    if norm == 0.0:
        return 0.0
    Uc = U if center is None else U - np.asarray(center).reshape(-1, 1)
    return float(np.linalg.norm(Uc - psi @ (psi.T @ Uc)) / norm)
