"""
Least-squares linear maps from reduced coordinates back to the ambient space
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la

from exceptions import (
    InvalidParameterError,
    RankDeficientEmbeddingError,
    SingularNeighborhoodError,
)

COND_MAX = 1e12
R_DIAG_RTOL = 1e-12


@dataclass
class LocalTangent:
    """
    Affine fit u ~ u_offset + phi y over the nearest snapshots in reduced space.

    phi = phi_perp R_perp is the reduced QR factorisation with a positive
    diagonal in R_perp.
    """

    phi: np.ndarray
    phi_perp: np.ndarray
    R_perp: np.ndarray
    neighbor_ids: np.ndarray
    y_center: np.ndarray
    u_offset: np.ndarray


def qr_positive(A: np.ndarray):
    """Reduced QR with non-negative diagonal in R"""
    Q, R = la.qr(A, mode="economic")
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    return Q * signs, R * signs[:, None]


def global_least_squares_map(
    U: np.ndarray, Y: np.ndarray, center_index: Optional[int] = 0
) -> np.ndarray:
    """psi minimising ||U_c - psi Y_c||_F, optionally centred on one column"""
    U = np.asarray(U, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if center_index is not None:
        U = U - U[:, [center_index]]
        Y = Y - Y[:, [center_index]]
    gram = Y @ Y.T
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > COND_MAX:
        raise RankDeficientEmbeddingError(
            "Embedding rows are linearly dependent", context={"d": int(Y.shape[0])}
        )
    return la.solve(gram, Y @ U.T, assume_a="sym").T


def global_linearise(
    U: np.ndarray, Y: np.ndarray, center_index: Optional[int] = 0
) -> np.ndarray:
    """Orthonormal factor of the global least-squares map"""
    psi = global_least_squares_map(U, Y, center_index)
    psi_perp, R = qr_positive(psi)
    diag = np.abs(np.diag(R))
    if diag.size and diag.min() <= R_DIAG_RTOL * max(diag.max(), 1e-300):
        raise RankDeficientEmbeddingError("Global map is rank deficient")
    return psi_perp


def nearest_in_reduced(y: np.ndarray, Y: np.ndarray, n: int) -> np.ndarray:
    """Indices of the n nearest columns of Y, lowest index first on ties"""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if not 1 <= n <= Y.shape[1]:
        raise InvalidParameterError("n must lie in [1, s]", context={"n": n, "s": Y.shape[1]})
    dist = np.linalg.norm(Y - np.asarray(y, dtype=float).reshape(-1, 1), axis=0)
    return np.argsort(dist, kind="stable")[:n]


def local_linearise(y_cur: np.ndarray, Y: np.ndarray, U: np.ndarray, n: int) -> LocalTangent:
    """
    Tangent phi = U_N W_N Y_N^T (Y_N W_N Y_N^T)^-1 over the n nearest
    snapshots, with W_N = I - 11^T / n the centring projector.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    d = Y.shape[0]
    if n <= d:
        raise SingularNeighborhoodError(
            "Linearisation needs more neighbours than reduced dimensions",
            context={"n": n, "d": d},
        )
    ids = nearest_in_reduced(y_cur, Y, n)
    Y_N = Y[:, ids]
    U_N = np.asarray(U, dtype=float)[:, ids]
    y_mean = Y_N.mean(axis=1)
    u_mean = U_N.mean(axis=1)
    Yc = Y_N - y_mean[:, None]
    Uc = U_N - u_mean[:, None]

    gram = Yc @ Yc.T
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > COND_MAX:
        raise SingularNeighborhoodError(
            "Neighbours do not span the reduced space", context={"n": n, "d": d}
        )
    phi = la.solve(gram, Yc @ Uc.T, assume_a="sym").T

    phi_perp, R_perp = qr_positive(phi)
    diag = np.diag(R_perp)
    if diag.min() <= R_DIAG_RTOL * max(diag.max(), 1e-300):
        raise SingularNeighborhoodError(
            "Local tangent is rank deficient", context={"n": n, "d": d}
        )
    return LocalTangent(
        phi=phi,
        phi_perp=phi_perp,
        R_perp=R_perp,
        neighbor_ids=ids,
        y_center=y_mean,
        u_offset=u_mean - phi @ y_mean,
    )
