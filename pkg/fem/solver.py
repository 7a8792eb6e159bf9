"""
Full-order Newton-Raphson solver for periodic RVE load paths
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse.linalg as spla

from core.logger import get_logger
from exceptions import ApplicationError, InvalidParameterError, NoConvergenceError
from fem.assembly import Assembler, FullSystem, apply_periodic
from fem.material import MaterialParams
from fem.mesh import Mesh
from fem.periodic import PeriodicPairing
from utils.validators import ArrayValidator

logger = get_logger(__name__)


@dataclass(frozen=True)
class SolverSettings:
    """Newton tolerance and load stepping"""

    res_max: float = 1e-6
    max_iterations: int = 25
    n_load_steps: int = 1

    def __post_init__(self):
        if self.res_max <= 0.0:
            raise InvalidParameterError("res_max must be positive")
        if self.max_iterations < 1 or self.n_load_steps < 1:
            raise InvalidParameterError("max_iterations and n_load_steps must be >= 1")


@dataclass
class FullSolveResult:
    """Converged fluctuations per path entry and the Newton statistics"""

    states: List[np.ndarray] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    wall_s: List[float] = field(default_factory=list)


def substeps(H_prev: np.ndarray, H_next: np.ndarray, count: int) -> List[np.ndarray]:
    """Linear sub-increments from H_prev to H_next, ending exactly at H_next"""
    steps = [H_prev + (m / count) * (H_next - H_prev) for m in range(1, count)]
    steps.append(np.asarray(H_next, dtype=float))
    return steps


class FullOrderProblem:
    """Periodic RVE problem: condensed tangent and residual at any state"""

    def __init__(
        self,
        mesh: Mesh,
        pairing: PeriodicPairing,
        mat: MaterialParams,
        quadrature: int = 4,
    ):
        self.mesh = mesh
        self.pairing = pairing
        self.mat = mat
        self.assembler = Assembler(mesh, mat, quadrature)
        self.T = pairing.transfer_matrix()

    @property
    def dof_count(self) -> int:
        return self.pairing.dof_count

    def expand(self, u_indep: np.ndarray) -> np.ndarray:
        return self.T @ u_indep

    def system(self, u_indep: np.ndarray, H_bar: np.ndarray) -> FullSystem:
        u_full = self.expand(u_indep)
        K_full, r_full = self.assembler.assemble(u_full, H_bar)
        system = apply_periodic(K_full, r_full, self.pairing, transfer=self.T)
        system.u_tilde = u_full
        system.H_bar = np.asarray(H_bar, dtype=float)
        return system

    def residual(self, u_indep: np.ndarray, H_bar: np.ndarray) -> np.ndarray:
        return self.T.T @ self.assembler.residual(self.expand(u_indep), H_bar)


class NewtonSolver:
    """Sequential load stepping with warm-started Newton iterations"""

    def __init__(self, problem: FullOrderProblem, settings: SolverSettings):
        self.problem = problem
        self.settings = settings

    def solve_step(self, u: np.ndarray, H_bar: np.ndarray, step: int):
        """Converge one load level from the warm start ``u``"""
        system = self.problem.system(u, H_bar)
        residual = system.residual_norm
        for iteration in range(1, self.settings.max_iterations + 1):
            du = spla.spsolve(system.K_bc.tocsc(), -system.g_bc)
            u = u + du
            system = self.problem.system(u, H_bar)
            residual = system.residual_norm
            logger.debug(
                "Newton iteration",
                extra={"step": step, "iteration": iteration, "residual": residual},
            )
            if residual < self.settings.res_max:
                return u, iteration, residual
        raise NoConvergenceError(
            "Newton iteration budget exhausted",
            step=step,
            iteration=self.settings.max_iterations,
            residual=residual,
        )

    def solve_path(
        self, H_bar_path: Sequence[np.ndarray], u0: Optional[np.ndarray] = None
    ) -> FullSolveResult:
        if len(H_bar_path) == 0:
            raise InvalidParameterError("H_bar_path must not be empty")

        u = np.zeros(self.problem.dof_count) if u0 is None else np.array(u0, dtype=float)
        H_prev = np.zeros((3, 3))
        result = FullSolveResult()
        for step, H_next in enumerate(H_bar_path):
            H_next = ArrayValidator.validate_gradient(H_next)
            started = time.perf_counter()
            total_iterations = 0
            residual = 0.0
            try:
                for H in substeps(H_prev, H_next, self.settings.n_load_steps):
                    u, iterations, residual = self.solve_step(u, H, step)
                    total_iterations += iterations
            except ApplicationError as e:
                raise e.with_context(step=step)
            H_prev = H_next
            result.states.append(self.problem.expand(u))
            result.iterations.append(total_iterations)
            result.residuals.append(residual)
            result.wall_s.append(time.perf_counter() - started)
            logger.info(
                "Load step converged",
                extra={"step": step, "iterations": total_iterations, "residual": residual},
            )
        return result


def newton_solve(
    mesh: Mesh,
    pairing: PeriodicPairing,
    mat: MaterialParams,
    H_bar_path: Sequence[np.ndarray],
    settings: Optional[SolverSettings] = None,
    quadrature: int = 4,
) -> List[np.ndarray]:
    """Converged full fluctuation vector for every entry of the load path"""
    problem = FullOrderProblem(mesh, pairing, mat, quadrature)
    solver = NewtonSolver(problem, settings or SolverSettings())
    return solver.solve_path(H_bar_path).states
