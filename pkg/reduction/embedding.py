"""
Spectral embeddings: Laplacian Eigenmaps and Locally Linear Embedding
"""

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np
import scipy.linalg as la

from core.logger import get_logger
from exceptions import (
    InvalidParameterError,
    SingularLocalSystemError,
    ZeroDegreeNodeError,
)
from reduction.graph import NeighborGraph

logger = get_logger(__name__)

COND_MAX = 1e12


@dataclass
class Embedding:
    """Reduced coordinates Y (d, s) of the snapshot columns"""

    Y: np.ndarray
    method: str
    eigenvalues: np.ndarray
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def d(self) -> int:
        return int(self.Y.shape[0])


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip every column so its largest-magnitude entry is positive"""
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return vectors * signs


def _check_dimension(d: int, s: int) -> None:
    if not 1 <= d <= s - 2:
        raise InvalidParameterError(
            "Embedding dimension must lie in [1, s - 2]", context={"d": d, "s": s}
        )


def lem_embed(graph: NeighborGraph, d: int) -> Embedding:
    """
    Laplacian Eigenmaps from the scaled problem D^-1 L v = lambda v.

    Solved through the symmetric form D^-1/2 L D^-1/2 w = lambda w with
    v = D^-1/2 w, so the rows of Y are D-orthonormal. The constant
    eigenvector (lambda = 0) is skipped.
    """
    W = graph.weights
    s = W.shape[0]
    _check_dimension(d, s)
    degree = W.sum(axis=1)
    if np.any(degree <= 0.0):
        raise ZeroDegreeNodeError(
            "Graph node without weighted edges",
            context={"node": int(np.argmax(degree <= 0.0))},
        )
    L = np.diag(degree) - W
    scale = 1.0 / np.sqrt(degree)
    lam, w = la.eigh(scale[:, None] * L * scale[None, :])
    v = _fix_signs(scale[:, None] * w[:, 1 : d + 1])
    logger.debug("LEM embedding", extra={"d": d, "lambda_1": float(lam[0])})
    return Embedding(Y=v.T, method="lem", eigenvalues=lam, params=graph.params())


def lle_weights(X: np.ndarray, graph: NeighborGraph, delta_reg: float = 1e-3) -> np.ndarray:
    """
    Reconstruction weights: row i solves G_i w = 1 on the neighbours of i,
    normalised to sum one. G_i gets (delta^2 / n_i) tr(G_i) added to its
    diagonal when n_i exceeds the ambient dimension or G_i is ill conditioned.
    """
    X = np.asarray(X, dtype=float)
    m, s = X.shape
    weights = np.zeros((s, s))
    for i in range(s):
        nbrs = graph.neighbors(i)
        n = nbrs.size
        if n == 0:
            raise ZeroDegreeNodeError("Node without neighbours", context={"node": i})
        Z = X[:, nbrs] - X[:, [i]]
        G = Z.T @ Z
        if n > m or np.linalg.cond(G) > COND_MAX:
            G = G + (delta_reg**2 / n) * np.trace(G) * np.eye(n)
        try:
            w = la.solve(G, np.ones(n), assume_a="sym")
        except la.LinAlgError as e:
            raise SingularLocalSystemError(
                "Local Gram system is singular", context={"node": i}
            ) from e
        total = w.sum()
        if not np.all(np.isfinite(w)) or abs(total) < 1e-300:
            raise SingularLocalSystemError(
                "Local Gram system is singular", context={"node": i}
            )
        weights[i, nbrs] = w / total
    return weights


def lle_embed(weights: np.ndarray, d: int, params: Dict[str, Any] = None) -> Embedding:
    """Bottom eigenvectors 2..d+1 of M = (I - W)^T (I - W)"""
    s = weights.shape[0]
    _check_dimension(d, s)
    IW = np.eye(s) - weights
    lam, V = la.eigh(IW.T @ IW)
    Y = _fix_signs(V[:, 1 : d + 1]).T
    logger.debug("LLE embedding", extra={"d": d, "lambda_1": float(lam[0])})
    return Embedding(Y=Y, method="lle", eigenvalues=lam, params=dict(params or {}))
