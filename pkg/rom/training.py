"""
Offline training of reduced-order models from a snapshot set
"""

from typing import Optional

import numpy as np

from core.base import BaseReducer
from core.logger import get_logger
from exceptions import DisconnectedGraphError, InvalidParameterError, RankDeficientError
from models import GraphConfig, GraphRule, Linearisation, MethodConfig, MethodName
from reduction.clustering import LpodParams, lpod_offline
from reduction.embedding import Embedding, lem_embed, lle_embed, lle_weights
from reduction.graph import NeighborGraph, build_graph
from reduction.linearisation import global_linearise
from reduction.pod import covariance_spectrum, numerical_rank, snapshot_pod
from rom.models import LpodRom, ManlRom, PodRom, TwoStageRom
from utils.helpers import RngStream

logger = get_logger(__name__)

D_BAR_DEFAULT = 60


def connected_graph(X: np.ndarray, graph: GraphConfig) -> NeighborGraph:
    """Build the graph, doubling k while a kNN graph stays disconnected"""
    s = X.shape[1]
    param = graph.eps if graph.rule == GraphRule.EPS_BALL else min(graph.k, s - 1)
    while True:
        try:
            return build_graph(X, graph.rule, param, graph.t)
        except DisconnectedGraphError as e:
            if graph.rule == GraphRule.EPS_BALL or param >= s - 1:
                raise
            widened = min(2 * int(param), s - 1)
            logger.warning(
                "Disconnected graph, raising k",
                extra={"k": param, "retry_k": widened, "components": e.components},
            )
            param = widened


def fit_embedding(
    X: np.ndarray, method: MethodName, d: int, graph: GraphConfig, delta_reg: float = 1e-3
) -> Embedding:
    """Graph plus LEM or LLE embedding of the columns of X"""
    nbr_graph = connected_graph(X, graph)
    if method == MethodName.LEM:
        return lem_embed(nbr_graph, d)
    if method == MethodName.LLE:
        weights = lle_weights(X, nbr_graph, delta_reg)
        embedding = lle_embed(weights, d, params=nbr_graph.params())
        embedding.params["delta_reg"] = delta_reg
        return embedding
    raise InvalidParameterError("Not a manifold method", context={"method": method.value})


def train_pod(U: np.ndarray, d: Optional[int] = None, ratio: Optional[float] = None) -> PodRom:
    return PodRom(psi=snapshot_pod(U, d=d, ratio=ratio).psi)


def train_lpod(U: np.ndarray, d: int, params: LpodParams, seed: int) -> LpodRom:
    return LpodRom(model=lpod_offline(U, params, RngStream(seed), d=d))


def train_manl(
    U: np.ndarray,
    method: MethodName,
    d: int,
    graph: GraphConfig,
    n_lin: int = 20,
    delta_reg: float = 1e-3,
    orthonormalise: bool = True,
    linearisation: Linearisation = Linearisation.LOCAL,
) -> ManlRom:
    """Single-stage manifold model in the full independent-dof space"""
    embedding = fit_embedding(U, method, d, graph, delta_reg)
    psi_global = None
    if linearisation == Linearisation.GLOBAL:
        psi_global = global_linearise(U, embedding.Y, center_index=0)
    return ManlRom(
        U_ambient=U,
        Y=embedding.Y,
        method=method.value,
        n_lin=n_lin,
        orthonormalise=orthonormalise,
        linearisation=linearisation,
        psi_global=psi_global,
        graph_params=embedding.params,
    )


def default_d_bar(U: np.ndarray) -> int:
    """min(s - 1, 60), capped at the numerical rank"""
    rank = numerical_rank(covariance_spectrum(U)[0])
    return min(U.shape[1] - 1, D_BAR_DEFAULT, rank)


def two_stage_offline(
    U: np.ndarray,
    d_bar: int,
    d: int,
    method: MethodName,
    graph: GraphConfig,
    n_lin: int = 20,
    delta_reg: float = 1e-3,
    orthonormalise: bool = True,
    linearisation: Linearisation = Linearisation.LOCAL,
) -> TwoStageRom:
    """Stage-one POD to d_bar, then manifold learning on Y_bar = psi^T U"""
    if not d < d_bar:
        raise InvalidParameterError(
            "Two-stage reduction needs d < d_bar", context={"d": d, "d_bar": d_bar}
        )
    psi = snapshot_pod(U, d=d_bar).psi
    Y_bar = psi.T @ U
    embedding = fit_embedding(Y_bar, method, d, graph, delta_reg)
    psi_global = None
    if linearisation == Linearisation.GLOBAL:
        psi_global = global_linearise(Y_bar, embedding.Y, center_index=0)
    logger.info("Trained two-stage model", extra={"d": d, "d_bar": d_bar, "method": method.value})
    return TwoStageRom(
        U_ambient=Y_bar,
        Y=embedding.Y,
        method=method.value,
        n_lin=n_lin,
        orthonormalise=orthonormalise,
        linearisation=linearisation,
        psi_outer=psi,
        psi_global=psi_global,
        graph_params=embedding.params,
    )


def train_model(
    U: np.ndarray, method: MethodConfig, d: int, lloyd_restarts: int = 100
) -> BaseReducer:
    """Fit the model described by one method entry at dimension d"""
    if method.name == MethodName.POD:
        return train_pod(U, d=d)
    if method.name == MethodName.LPOD:
        cfg = method.lpod
        params = LpodParams(
            k=cfg.k,
            r=cfg.r,
            core_min=cfg.core_min,
            size_min=cfg.size_min,
            size_max=cfg.size_max,
            restarts=lloyd_restarts,
        )
        return train_lpod(U, d, params, cfg.seed)

    options = dict(
        graph=method.graph,
        n_lin=min(method.n_lin, U.shape[1]),
        delta_reg=method.delta_reg,
        orthonormalise=method.orthonormalise,
        linearisation=method.linearisation,
    )
    if method.two_stage:
        d_bar = method.d_bar or default_d_bar(U)
        if d_bar > numerical_rank(covariance_spectrum(U)[0]):
            raise RankDeficientError(
                "d_bar exceeds the snapshot rank", context={"d_bar": d_bar}
            )
        return two_stage_offline(U, d_bar, d, method.name, **options)
    return train_manl(U, method.name, d, **options)
