"""
Reduced Newton-Raphson solver shared by every reduced-order model
"""

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from core.base import BaseReducer, ReducedState
from core.logger import get_logger
from exceptions import ApplicationError, InvalidParameterError, NoConvergenceError
from fem.solver import FullOrderProblem, SolverSettings, substeps
from rom.models import LpodRom, ManlRom, PodRom, TwoStageRom
from utils.validators import ArrayValidator

logger = get_logger(__name__)

ZIGZAG_SWITCHES = 4


@dataclass
class StepTrace:
    step: int
    iterations: int
    residual: float
    wall_s: float
    clusters: List[int] = field(default_factory=list)
    zigzag: bool = False
    retries: int = 0


@dataclass
class SolveTrace:
    """Per-load-step Newton statistics of one reduced solve"""

    steps: List[StepTrace] = field(default_factory=list)

    @property
    def total_iterations(self) -> int:
        return sum(s.iterations for s in self.steps)

    @property
    def wall_s(self) -> float:
        return sum(s.wall_s for s in self.steps)

    @property
    def retries(self) -> int:
        """Tangents that needed a widened neighbourhood"""
        return sum(s.retries for s in self.steps)

    def to_rows(self, path_id: int) -> List[dict]:
        """Rows of the trace CSV stream"""
        return [
            {
                "path_id": path_id,
                "step": s.step,
                "iterations": s.iterations,
                "residual": f"{s.residual:.6e}",
                "wall_ms": f"{1000.0 * s.wall_s:.3f}",
                "cluster_seq": " ".join(str(c) for c in s.clusters),
                "retries": s.retries,
            }
            for s in self.steps
        ]


def is_zigzag(clusters: Sequence[int]) -> bool:
    """True when one pair of clusters is switched between at least four times"""
    switches = Counter(
        frozenset((a, b)) for a, b in zip(clusters[:-1], clusters[1:]) if a != b
    )
    return any(count >= ZIGZAG_SWITCHES for count in switches.values())


class ReducedNewtonSolver:
    """
    Galerkin-projected Newton iteration on the full periodic system.

    Each iteration assembles K_bc and g_bc at the reconstructed state,
    solves V^T K V z = -V^T g and advances the reduced state. Convergence is
    tested on the reduced residual with the projector of the new state, which
    is then reused for the next iteration.
    """

    def __init__(self, reducer: BaseReducer, problem: FullOrderProblem, settings: SolverSettings):
        self.reducer = reducer
        self.problem = problem
        self.settings = settings

    def solve_step(self, state: ReducedState, H_bar: np.ndarray, step: int, clusters: List[int]):
        """Converge one load level; returns iterations, residual and tangent retries"""
        try:
            projection = self.reducer.projection(state)
        except ApplicationError as e:
            raise e.with_context(step=step, iteration=0)
        retries = int(projection.retried)
        system = self.problem.system(state.u, H_bar)
        residual = float("inf")
        for iteration in range(1, self.settings.max_iterations + 1):
            try:
                if projection.cluster is not None:
                    clusters.append(projection.cluster)
                K_r, g_r = projection.reduce(system.K_bc, system.g_bc)
                z = la.solve(K_r, -g_r, assume_a="sym")
                self.reducer.advance(state, projection, z)
                projection = self.reducer.projection(state)
                retries += int(projection.retried)
                system = self.problem.system(state.u, H_bar)
            except ApplicationError as e:
                raise e.with_context(step=step, iteration=iteration)
            except la.LinAlgError as e:
                raise NoConvergenceError(
                    f"Reduced system is singular: {e}", step=step, iteration=iteration
                ) from e
            g_r = projection.reduced_residual(system.g_bc)
            residual = float(np.max(np.abs(g_r))) if g_r.size else 0.0
            logger.debug(
                "Reduced Newton iteration",
                extra={"step": step, "iteration": iteration, "residual": residual},
            )
            if residual < self.settings.res_max:
                return iteration, residual, retries
        raise NoConvergenceError(
            "Reduced Newton iteration budget exhausted",
            step=step,
            iteration=self.settings.max_iterations,
            residual=residual,
        )

    def solve_path(
        self, H_bar_path: Sequence[np.ndarray], state: Optional[ReducedState] = None
    ) -> Tuple[List[np.ndarray], SolveTrace]:
        if len(H_bar_path) == 0:
            raise InvalidParameterError("H_bar_path must not be empty")
        state = state or self.reducer.initial_state(self.problem.dof_count)
        H_prev = np.zeros((3, 3))
        states, trace = [], SolveTrace()
        for step, H_next in enumerate(H_bar_path):
            H_next = ArrayValidator.validate_gradient(H_next)
            started = time.perf_counter()
            clusters: List[int] = []
            iterations, residual, retries = 0, 0.0, 0
            for H in substeps(H_prev, H_next, self.settings.n_load_steps):
                used, residual, widened = self.solve_step(state, H, step, clusters)
                iterations += used
                retries += widened
            zigzag = is_zigzag(clusters)
            if zigzag:
                logger.warning(
                    "Cluster selection alternates within a load step",
                    extra={"step": step, "clusters": clusters},
                )
            trace.steps.append(
                StepTrace(
                    step=step,
                    iterations=iterations,
                    residual=residual,
                    wall_s=time.perf_counter() - started,
                    clusters=clusters,
                    zigzag=zigzag,
                    retries=retries,
                )
            )
            logger.info(
                "Reduced load step converged",
                extra={"step": step, "iterations": iterations, "residual": residual, "retries": retries},
            )
            states.append(state.u.copy())
            H_prev = H_next
        return states, trace


def rom_solve(
    reducer: BaseReducer,
    problem: FullOrderProblem,
    H_bar_path: Sequence[np.ndarray],
    settings: Optional[SolverSettings] = None,
) -> Tuple[List[np.ndarray], SolveTrace]:
    """Independent-dof fluctuation per path entry and the solve trace"""
    return ReducedNewtonSolver(reducer, problem, settings or SolverSettings()).solve_path(H_bar_path)


def _require(reducer: BaseReducer, kind) -> None:
    if not isinstance(reducer, kind):
        raise InvalidParameterError(
            f"Expected a {kind.__name__} model", context={"got": type(reducer).__name__}
        )


def rom_solve_pod(model: PodRom, problem, H_bar_path, settings=None):
    _require(model, PodRom)
    return rom_solve(model, problem, H_bar_path, settings)


def rom_solve_lpod(model: LpodRom, problem, H_bar_path, settings=None):
    _require(model, LpodRom)
    return rom_solve(model, problem, H_bar_path, settings)


def rom_solve_manl(model: ManlRom, problem, H_bar_path, settings=None):
    _require(model, ManlRom)
    return rom_solve(model, problem, H_bar_path, settings)


def rom_solve_two_stage(model: TwoStageRom, problem, H_bar_path, settings=None):
    _require(model, TwoStageRom)
    return rom_solve(model, problem, H_bar_path, settings)
