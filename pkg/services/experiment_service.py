"""
Experiment orchestration: load paths, snapshot collection and campaigns
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.logger import RunLogger, get_logger
from exceptions import ApplicationError, InvalidParameterError
from fem.material import MaterialParams
from fem.mesh import Mesh, build_rve_mesh
from fem.periodic import PeriodicPairing, build_periodic_pairing
from fem.solver import FullOrderProblem, NewtonSolver, SolverSettings
from models import CampaignConfig, LoadPath, MethodConfig, ReportRow, SeedStudyRow
from reduction.pod import SnapshotSet
from rom.solvers import rom_solve
from rom.training import train_model
from services.analysis_service import relative_errors
from utils.helpers import RngStream, Timer

logger = get_logger(__name__)


def unit_direction(rng: RngStream) -> np.ndarray:
    """Isotropic Gaussian 3x3 direction with unit Frobenius norm"""
    N = rng.standard_normal(9).reshape(3, 3)
    return N / np.linalg.norm(N)


def generate_load_paths(
    count: int, rng: RngStream, dH_lp: float = 0.03, dH_ls: float = 0.015, steps: int = 10
) -> List[LoadPath]:
    if count < 1 or steps < 1:
        raise InvalidParameterError(
            "count and steps must be >= 1", context={"count": count, "steps": steps}
        )
    paths = []
    for path_id in range(count):
        N_LP = unit_direction(rng)
        N_LS = np.empty((steps, 3, 3))
        H_steps = np.empty((steps, 3, 3))
        H = np.zeros((3, 3))
        for n in range(steps):
            N_LS[n] = unit_direction(rng)
            H = H + (dH_lp * N_LP + dH_ls * N_LS[n])
            H_steps[n] = H
        paths.append(
            LoadPath(id=path_id, N_LP=N_LP, N_LS=N_LS, dH_lp=dH_lp, dH_ls=dH_ls, H_steps=H_steps)
        )
    return paths


def _map_paths(func, paths: Sequence[LoadPath], threads: int) -> list:
    """Apply ``func`` to every path; results come back in path order"""
    if threads <= 1 or len(paths) <= 1:
        return [func(path) for path in paths]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, paths))


def solve_reference_paths(
    problem: FullOrderProblem,
    paths: Sequence[LoadPath],
    settings: SolverSettings,
    threads: int = 1,
) -> List[List[np.ndarray]]:
    """Full-order independent-dof fluctuation per path and load step"""
    solver = NewtonSolver(problem, settings)

    def solve(path: LoadPath) -> List[np.ndarray]:
        run = RunLogger(f"fom-path-{path.id}", logger)
        run.log_start("full-solve", {"steps": path.steps})
        try:
            result = solver.solve_path(list(path.H_steps))
        except ApplicationError as e:
            e.with_context(path=path.id)
            run.log_error(e)
            raise
        run.log_done(iterations=result.iterations)
        return [problem.pairing.restrict(u) for u in result.states]

    return _map_paths(solve, paths, threads)


def snapshot_set(paths: Sequence[LoadPath], states: Sequence[Sequence[np.ndarray]]) -> SnapshotSet:
    """Zero column followed by every path's converged states, with load metadata"""
    dof_count = states[0][0].shape[0]
    columns = [np.zeros(dof_count)]
    meta: List[Dict[str, Any]] = [{"path": None, "step": 0, "H": np.zeros((3, 3)).tolist()}]
    for path, path_states in zip(paths, states):
        for n, u in enumerate(path_states):
            columns.append(u)
            meta.append({"path": path.id, "step": n + 1, "H": path.H_steps[n].tolist()})
    return SnapshotSet(U=np.column_stack(columns), meta=meta)


def collect_snapshots(
    paths: Sequence[LoadPath],
    mesh: Mesh,
    pairing: PeriodicPairing,
    mat: MaterialParams,
    settings: Optional[SolverSettings] = None,
    quadrature: int = 4,
    threads: int = 1,
) -> SnapshotSet:
    problem = FullOrderProblem(mesh, pairing, mat, quadrature)
    states = solve_reference_paths(problem, paths, settings or SolverSettings(), threads)
    snapshots = snapshot_set(paths, states)
    logger.info(
        "Collected snapshots",
        extra={"paths": len(paths), "D": snapshots.dof_count, "s": snapshots.count},
    )
    return snapshots


@dataclass
class CampaignContext:
    """Everything a campaign cell needs: problem, paths, references, training data"""

    problem: FullOrderProblem
    paths: List[LoadPath]
    references: List[List[np.ndarray]]
    snapshots: SnapshotSet
    settings: SolverSettings


@dataclass
class ExperimentReport:
    """Report rows plus per-path convergence flags keyed by ``label:d``"""

    rows: List[ReportRow] = field(default_factory=list)
    convergence: Dict[str, List[bool]] = field(default_factory=dict)

    def row(self, method: str, d: int) -> ReportRow:
        for row in self.rows:
            if row.method == method and row.d == d:
                return row
        raise InvalidParameterError("No such report cell", context={"method": method, "d": d})


def solver_settings(config: CampaignConfig) -> SolverSettings:
    return SolverSettings(
        res_max=config.solver.res_max,
        max_iterations=config.solver.max_iter,
        n_load_steps=config.solver.n_load_steps,
    )


def build_problem(config: CampaignConfig) -> FullOrderProblem:
    mesh = build_rve_mesh(
        config.mesh.edge_length,
        config.mesh.divisions,
        config.mesh.pore_centers,
        config.mesh.pore_radius,
    )
    pairing = build_periodic_pairing(mesh)
    mat = MaterialParams.from_youngs(config.material.E, config.material.nu)
    return FullOrderProblem(mesh, pairing, mat, config.mesh.quadrature)


def prepare_campaign(config: CampaignConfig, threads: int = 1) -> CampaignContext:
    """Mesh, load paths and full-order references; training uses the first n_train paths"""
    problem = build_problem(config)
    paths = generate_load_paths(
        config.paths.total,
        RngStream(config.paths.seed),
        config.paths.dH_lp,
        config.paths.dH_ls,
        config.paths.steps,
    )
    settings = solver_settings(config)
    references = solve_reference_paths(problem, paths, settings, threads)
    n_train = config.paths.n_train
    snapshots = snapshot_set(paths[:n_train], references[:n_train])
    return CampaignContext(problem, paths, references, snapshots, settings)


def warm_up(problem: FullOrderProblem, H_bar: np.ndarray) -> None:
    """One untimed assembly so the first timed solve does not pay first-call costs"""
    problem.system(np.zeros(problem.dof_count), H_bar)


def evaluate_cell(
    context: CampaignContext,
    method: MethodConfig,
    d: int,
    threads: int = 1,
    lloyd_restarts: int = 100,
) -> Tuple[ReportRow, List[bool]]:
    """Train one (method, d) model and replay every path through it"""
    label = method.label
    run = RunLogger(f"{label}:{d}", logger)
    run.log_start("campaign-cell", {"method": label, "d": d})
    total = len(context.paths)
    try:
        reducer = train_model(context.snapshots.U, method, d, lloyd_restarts)
    except ApplicationError as e:
        run.log_error(e)
        return (
            ReportRow(
                method=label,
                d=d,
                E_mean_pct=float("nan"),
                E_max_pct=float("nan"),
                wall_s=0.0,
                converged_paths=0,
                total_paths=total,
                error=e.to_line(),
            ),
            [False] * total,
        )

    def replay(path: LoadPath):
        """States or None, the failure line, and the wall time spent either way"""
        states, failed = None, None
        with Timer() as timer:
            try:
                states, _ = rom_solve(reducer, context.problem, list(path.H_steps), context.settings)
            except ApplicationError as e:
                failed = e.with_context(path=path.id).to_line()
                logger.warning(
                    "Reduced solve failed", extra={"method": label, "d": d, "error": failed}
                )
        return states, failed, timer.elapsed

    outcomes = _map_paths(replay, context.paths, threads)

    errors: List[np.ndarray] = []
    flags: List[bool] = []
    failure: Optional[str] = None
    first_failure: Optional[str] = None
    wall_s = 0.0
    for path, (states, failed, elapsed), reference in zip(
        context.paths, outcomes, context.references
    ):
        wall_s += elapsed
        first_failure = first_failure or failed
        if states is not None:
            try:
                errors.append(relative_errors(states, reference))
            except ApplicationError as e:
                e.with_context(path=path.id)
                run.log_error(e)
                failure = failure or e.to_line()
                states = None
        flags.append(states is not None)

    if errors:
        all_errors = np.concatenate(errors)
        e_mean, e_max = float(all_errors.mean()), float(all_errors.max())
    else:
        e_mean = e_max = float("nan")
        failure = failure or first_failure or "no path converged"
    row = ReportRow(
        method=label,
        d=d,
        E_mean_pct=100.0 * e_mean,
        E_max_pct=100.0 * e_max,
        wall_s=wall_s,
        converged_paths=sum(flags),
        total_paths=total,
        error=failure,
    )
    run.log_done(E_mean_pct=row.E_mean_pct, E_max_pct=row.E_max_pct, converged=row.converged_paths)
    return row, flags


def run_campaign(
    config: CampaignConfig,
    threads: int = 1,
    lloyd_restarts: int = 100,
    context: Optional[CampaignContext] = None,
) -> ExperimentReport:
    """
    Train every (method, d) cell on the training paths and validate on all
    paths. A failing cell is recorded in its row and the campaign continues.
    """
    context = context or prepare_campaign(config, threads)
    warm_up(context.problem, context.paths[0].H_steps[0])
    report = ExperimentReport()
    for method in config.methods:
        for d in method.d:
            row, flags = evaluate_cell(context, method, d, threads, lloyd_restarts)
            report.rows.append(row)
            report.convergence[f"{row.method}:{d}"] = flags
    logger.info("Campaign finished", extra={"cells": len(report.rows)})
    return report


def run_seed_study(
    config: CampaignConfig, seeds: Sequence[int], threads: int = 1, lloyd_restarts: int = 100
) -> List[SeedStudyRow]:
    """Repeat the campaign for several path seeds and summarise each cell"""
    if not seeds:
        raise InvalidParameterError("At least one seed is required")
    cells: Dict[Tuple[str, int], List[ReportRow]] = {}
    for seed in seeds:
        seeded = config.model_copy(deep=True)
        seeded.paths.seed = int(seed)
        for row in run_campaign(seeded, threads, lloyd_restarts).rows:
            cells.setdefault((row.method, row.d), []).append(row)

    summary = []
    for (method, d), rows in cells.items():
        mean_pct = np.array([r.E_mean_pct for r in rows])
        max_pct = np.array([r.E_max_pct for r in rows])
        summary.append(
            SeedStudyRow(
                method=method,
                d=d,
                seeds=[int(s) for s in seeds],
                E_mean_pct_mean=float(np.mean(mean_pct)),
                E_mean_pct_min=float(np.min(mean_pct)),
                E_mean_pct_max=float(np.max(mean_pct)),
                E_max_pct_mean=float(np.mean(max_pct)),
                E_max_pct_min=float(np.min(max_pct)),
                E_max_pct_max=float(np.max(max_pct)),
            )
        )
    return summary


class ExperimentService:
    """Experiment entry points bound to process settings"""

    def __init__(self, threads: int = 1, lloyd_restarts: int = 100):
        self.threads = threads
        self.lloyd_restarts = lloyd_restarts

    def load_paths(self, config: CampaignConfig) -> List[LoadPath]:
        return generate_load_paths(
            config.paths.total,
            RngStream(config.paths.seed),
            config.paths.dH_lp,
            config.paths.dH_ls,
            config.paths.steps,
        )

    def snapshots(self, config: CampaignConfig, paths: Sequence[LoadPath]) -> SnapshotSet:
        problem = build_problem(config)
        states = solve_reference_paths(problem, paths, solver_settings(config), self.threads)
        return snapshot_set(paths, states)

    def campaign(self, config: CampaignConfig) -> ExperimentReport:
        return run_campaign(config, self.threads, self.lloyd_restarts)

    def seed_study(self, config: CampaignConfig, seeds: Sequence[int]) -> List[SeedStudyRow]:
        return run_seed_study(config, seeds, self.threads, self.lloyd_restarts)
