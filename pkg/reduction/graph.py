"""
Neighbour graphs over snapshot columns
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from core.logger import get_logger
from exceptions import DisconnectedGraphError, InvalidParameterError
from models import GraphRule

logger = get_logger(__name__)


@dataclass
class NeighborGraph:
    """Symmetric adjacency (s, s) with Gaussian or unit weights"""

    adjacency: np.ndarray
    weights: np.ndarray
    rule: GraphRule
    param: float
    t: float = math.inf

    @property
    def size(self) -> int:
        return int(self.adjacency.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        """Neighbour counts per node"""
        return self.adjacency.sum(axis=1)

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def params(self) -> Dict[str, Any]:
        return {"rule": self.rule.value, "param": self.param, "t": self.t}


@dataclass
class ConnectivityStats:
    """Degree distribution of a graph"""

    min: float
    q25: float
    median: float
    q75: float
    max: float
    components: int


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    """Euclidean distances between the columns of X"""
    return squareform(pdist(np.asarray(X, dtype=float).T))


def _knn_adjacency(dist: np.ndarray, k: int) -> np.ndarray:
    s = dist.shape[0]
    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    A = np.zeros((s, s), dtype=bool)
    A[np.repeat(np.arange(s), k), order.ravel()] = True
    return A


def count_components(adjacency: np.ndarray) -> int:
    n_components, _ = connected_components(sp.csr_matrix(adjacency), directed=False)
    return int(n_components)


def build_graph(
    X: np.ndarray,
    rule: Union[GraphRule, str],
    param: float,
    t: float = math.inf,
) -> NeighborGraph:
    """
    Neighbour graph over the columns of X.

    ``param`` is k for the kNN rules and the radius for the eps ball. Weights
    are exp(-|x_i - x_j|^2 / t) on edges; t = inf gives unit weights.
    """
    rule = GraphRule(rule)
    X = np.asarray(X, dtype=float)
    s = X.shape[1]
    if s < 3:
        raise InvalidParameterError("Graphs need at least three points", context={"s": s})
    if t <= 0.0:
        raise InvalidParameterError("Gaussian width t must be positive", context={"t": t})

    dist = pairwise_distances(X)
    if rule == GraphRule.EPS_BALL:
        if param <= 0.0:
            raise InvalidParameterError("eps must be positive", context={"eps": param})
        adjacency = dist <= param
        np.fill_diagonal(adjacency, False)
    else:
        k = int(param)
        if not 1 <= k < s:
            raise InvalidParameterError("k must lie in [1, s)", context={"k": k, "s": s})
        directed = _knn_adjacency(dist, k)
        if rule == GraphRule.SYMMETRIC_KNN:
            adjacency = directed | directed.T
        else:
            adjacency = directed & directed.T

    components = count_components(adjacency)
    if components > 1:
        raise DisconnectedGraphError(
            "Neighbour graph is disconnected, raise k or eps",
            components=components,
            context={"rule": rule.value, "param": param},
        )

    if math.isinf(t):
        weights = adjacency.astype(float)
    else:
        weights = np.where(adjacency, np.exp(-(dist**2) / t), 0.0)

    logger.debug(
        "Built neighbour graph",
        extra={"rule": rule.value, "param": param, "edges": int(adjacency.sum() // 2)},
    )
    return NeighborGraph(adjacency=adjacency, weights=weights, rule=rule, param=param, t=t)


def graph_connectivity(graph: NeighborGraph) -> ConnectivityStats:
    """Degree quartiles and component count"""
    q = np.percentile(graph.degrees, [0, 25, 50, 75, 100])
    return ConnectivityStats(
        min=float(q[0]),
        q25=float(q[1]),
        median=float(q[2]),
        q75=float(q[3]),
        max=float(q[4]),
        components=count_components(graph.adjacency),
    )
