"""
Clustered local POD bases: Lloyd k-means, overlap enlargement and per-cluster POD
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from core.logger import get_logger
from exceptions import ClusteringFailedError, InvalidParameterError, RankDeficientError
from reduction.pod import PodBasis, covariance_spectrum, numerical_rank, snapshot_pod
from utils.helpers import RngStream

logger = get_logger(__name__)


@dataclass(frozen=True)
class LpodParams:
    """Cluster count, softening ratio and size bounds"""

    k: int = 6
    r: float = 1.0
    core_min: int = 7
    size_min: int = 30
    size_max: int = 50
    restarts: int = 100


@dataclass
class LloydResult:
    centroids: np.ndarray
    labels: np.ndarray
    costs: List[float] = field(default_factory=list)

    def clusters(self, k: int) -> List[np.ndarray]:
        return [np.flatnonzero(self.labels == j) for j in range(k)]


@dataclass
class LpodModel:
    """Centroids (D, k), enlarged clusters and one centred basis per cluster"""

    centroids: np.ndarray
    clusters: List[np.ndarray]
    core_clusters: List[np.ndarray]
    bases: List[PodBasis]
    params: LpodParams
    seed: int = 0

    @property
    def k(self) -> int:
        return int(self.centroids.shape[1])

    def nearest_cluster(self, u: np.ndarray) -> int:
        """Closest centroid in the solution space, lowest index on ties"""
        dist = np.linalg.norm(self.centroids - np.asarray(u).reshape(-1, 1), axis=0)
        return int(np.argmin(dist))


def _assign(U: np.ndarray, centroids: np.ndarray) -> Tuple[np.ndarray, float]:
    sq = cdist(U.T, centroids.T, "sqeuclidean")
    labels = np.argmin(sq, axis=1)
    return labels, float(sq[np.arange(U.shape[1]), labels].sum())


def lloyd_iterations(U: np.ndarray, initial: np.ndarray, max_iter: int = 300) -> LloydResult:
    """Alternate assignment and centroid update until the labels are stable"""
    centroids = np.array(initial, dtype=float)
    labels, cost = _assign(U, centroids)
    costs = [cost]
    for _ in range(max_iter):
        for j in range(centroids.shape[1]):
            members = labels == j
            if np.any(members):
                centroids[:, j] = U[:, members].mean(axis=1)
        new_labels, cost = _assign(U, centroids)
        costs.append(cost)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return LloydResult(centroids=centroids, labels=labels, costs=costs)


def kmeans_lloyd(
    U: np.ndarray,
    k: int,
    rng: RngStream,
    min_core: int = 1,
    restarts: int = 100,
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Lloyd k-means in the Euclidean norm with random snapshot initialisation.

    Results whose smallest cluster is below ``min_core`` are rejected and the
    algorithm restarts from fresh centroids.
    """
    U = np.asarray(U, dtype=float)
    s = U.shape[1]
    if not 1 <= k <= s:
        raise InvalidParameterError("k must lie in [1, s]", context={"k": k, "s": s})

    for attempt in range(1, restarts + 1):
        initial = U[:, rng.choice(s, k)]
        result = lloyd_iterations(U, initial)
        clusters = result.clusters(k)
        sizes = [c.size for c in clusters]
        if min(sizes) >= min_core:
            logger.debug(
                "Clustering accepted", extra={"attempt": attempt, "sizes": sizes}
            )
            return result.centroids, clusters

    raise ClusteringFailedError(
        "Restart budget exhausted before every cluster reached the core size",
        context={"k": k, "min_core": min_core, "restarts": restarts},
    )


def enlarge_clusters(
    U: np.ndarray,
    centroids: np.ndarray,
    clusters: List[np.ndarray],
    r: float,
    size_min: int,
    size_max: int,
) -> List[np.ndarray]:
    """Grow each cluster by its nearest non-members up to the target size"""
    U = np.asarray(U, dtype=float)
    s = U.shape[1]
    enlarged = []
    for j, members in enumerate(clusters):
        n = members.size
        target = min(max(size_min, min(n + math.ceil(r * n), size_max)), s)
        if n >= target:
            enlarged.append(np.sort(members))
            continue
        dist = np.linalg.norm(U - centroids[:, [j]], axis=0)
        order = np.argsort(dist, kind="stable")
        candidates = order[~np.isin(order, members)]
        grown = np.concatenate([members, candidates[: target - n]])
        enlarged.append(np.sort(grown))
    return enlarged


def lpod_offline(
    U: np.ndarray,
    params: LpodParams,
    rng: RngStream,
    d: Optional[int] = None,
    ratio: Optional[float] = None,
) -> LpodModel:
    """Cluster, enlarge and fit one centroid-centred POD basis per cluster"""
    if (d is None) == (ratio is None):
        raise InvalidParameterError("Give exactly one of d or ratio", context={"d": d, "ratio": ratio})
    U = np.asarray(U, dtype=float)
    centroids, core = kmeans_lloyd(U, params.k, rng, params.core_min, params.restarts)
    clusters = enlarge_clusters(U, centroids, core, params.r, params.size_min, params.size_max)

    bases = []
    for j, members in enumerate(clusters):
        centred = U[:, members] - centroids[:, [j]]
        if ratio is not None:
            bases.append(snapshot_pod(centred, ratio=ratio))
            continue
        rank = numerical_rank(covariance_spectrum(centred)[0])
        if rank == 0:
            raise RankDeficientError(
                "Cluster snapshots coincide with their centroid", context={"cluster": j}
            )
        local_d = min(d, rank)
        if local_d < d:
            logger.warning(
                "Local basis size clamped to cluster rank",
                extra={"cluster": j, "d": d, "rank": rank},
            )
        bases.append(snapshot_pod(centred, d=local_d))

    logger.info(
        "Trained local bases",
        extra={"k": params.k, "sizes": [int(c.size) for c in clusters]},
    )
    return LpodModel(
        centroids=centroids,
        clusters=clusters,
        core_clusters=core,
        bases=bases,
        params=params,
        seed=rng.seed,
    )


def lpod_reproduction_error(U: np.ndarray, model: LpodModel) -> float:
    """Relative error of projecting each snapshot on its nearest-centroid basis"""
    U = np.asarray(U, dtype=float)
    norm = np.linalg.norm(U)
    if norm == 0.0:
        return 0.0
    residual = np.zeros_like(U)
    for i in range(U.shape[1]):
        j = model.nearest_cluster(U[:, i])
        centred = U[:, i] - model.centroids[:, j]
        psi = model.bases[j].psi
        residual[:, i] = centred - psi @ (psi.T @ centred)
    return float(np.linalg.norm(residual) / norm)
