"""
Subcommands wiring configuration, persistence and the experiment pipeline
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from core.logger import get_logger
from dependencies import ComponentFactory, Repositories
from exceptions import ApplicationError
from models import CampaignConfig
from rom.solvers import rom_solve
from rom.training import train_model
from services import analysis_service
from services.experiment_service import (
    build_problem,
    solve_reference_paths,
    solver_settings,
)
from storage.repositories import MatrixRepository, ModelRepository, SnapshotRepository
from utils.helpers import DictHelper

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

TRACE_COLUMNS = ["path_id", "step", "iterations", "residual", "wall_ms", "cluster_seq", "retries"]


class UsageError(Exception):
    """Bad invocation: missing or invalid config, missing required flag"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def load_config(path: Optional[str], overrides: Optional[Sequence[str]] = None) -> CampaignConfig:
    """Read, override and validate a campaign config"""
    if not path:
        raise UsageError("--config is required")
    config_path = Path(path)
    if not config_path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"config is not valid JSON: {e}") from e
    try:
        raw = DictHelper.apply_overrides(raw, overrides)
    except ApplicationError as e:
        raise UsageError(e.message) from e
    try:
        return CampaignConfig.model_validate(raw)
    except ValidationError as e:
        raise UsageError(f"invalid config: {e.errors()[0]['msg']}") from e


def _split_artifact(path: str) -> Tuple[Path, str]:
    artifact = Path(path)
    return artifact.parent, artifact.stem if artifact.suffix == ".mor" else artifact.name


def _model_name(label: str, d: int) -> str:
    return f"{label.lower()}-d{d}"


def cmd_mesh(args, repos: Repositories) -> int:
    config = load_config(args.config, args.set)
    problem = build_problem(config)
    path = repos.meshes.save("mesh", (problem.mesh, problem.pairing))
    logger.info(
        "Mesh written",
        extra={"path": path, "nodes": problem.mesh.node_count, "D": problem.dof_count},
    )
    return EXIT_OK


def cmd_paths(args, repos: Repositories) -> int:
    config = load_config(args.config, args.set)
    paths = ComponentFactory.get_experiment_service().load_paths(config)
    repos.paths.save("paths", paths)
    return EXIT_OK


def cmd_solve(args, repos: Repositories) -> int:
    """Full-order solves of the training paths into the snapshot container"""
    config = load_config(args.config, args.set)
    service = ComponentFactory.get_experiment_service()
    paths = service.load_paths(config)[: config.paths.n_train]
    snapshots = service.snapshots(config, paths)
    repos.snapshots.save("snapshots", snapshots)
    analysis_service.write_csv(
        repos.root / "eigenvalues.csv",
        analysis_service.eigenvalue_decay_report(snapshots.U),
        ["index", "eigenvalue", "cumulative_fraction"],
    )
    return EXIT_OK


def cmd_train(args, repos: Repositories) -> int:
    config = load_config(args.config, args.set)
    root, name = _split_artifact(args.snapshots or str(repos.root / "snapshots.mor"))
    snapshots = SnapshotRepository(root).get(name)
    restarts = ComponentFactory.get_settings().lloyd_restarts
    for method in config.methods:
        for d in method.d:
            reducer = train_model(snapshots.U, method, d, restarts)
            repos.models.save(_model_name(method.label, d), reducer)
    return EXIT_OK


def cmd_rom_solve(args, repos: Repositories) -> int:
    """Replay every configured path through a stored model"""
    if not args.model:
        raise UsageError("--model is required")
    config = load_config(args.config, args.set)
    model_dir = Path(args.model)
    reducer = ModelRepository(model_dir.parent).get(model_dir.name)
    problem = build_problem(config)
    settings = solver_settings(config)
    paths = ComponentFactory.get_experiment_service().load_paths(config)

    rows: List[Dict] = []
    rom_states: List[np.ndarray] = []
    for path in paths:
        states, trace = rom_solve(reducer, problem, list(path.H_steps), settings)
        repos.matrices.save(f"rom_path_{path.id}", np.column_stack(states))
        rows.extend(trace.to_rows(path.id))
        rom_states.extend(states)
    analysis_service.write_csv(repos.root / "trace.csv", rows, TRACE_COLUMNS)

    if args.reference:
        threads = ComponentFactory.get_settings().threads
        references = solve_reference_paths(problem, paths, settings, threads)
        e_mean, e_max = analysis_service.error_metrics(
            rom_states, [u for ref in references for u in ref]
        )
        print(f"E_mean_pct={100.0 * e_mean:.6f} E_max_pct={100.0 * e_max:.6f}")
    return EXIT_OK


def cmd_corrdim(args, repos: Repositories) -> int:
    if not args.snapshots:
        raise UsageError("--snapshots is required")
    root, name = _split_artifact(args.snapshots)
    U = MatrixRepository(root).get(name)
    rows, plateau = analysis_service.corrdim_report(U, grid_points=args.grid)
    analysis_service.write_csv(
        repos.root / "corrdim.csv", rows, ["eps", "p_cd", "delta_sd", "plateau"]
    )
    print(f"plateau={plateau:.6f}")
    return EXIT_OK


def cmd_campaign(args, repos: Repositories) -> int:
    config = load_config(args.config, args.set)
    service = ComponentFactory.get_experiment_service()
    if args.seeds:
        rows = service.seed_study(config, args.seeds)
        analysis_service.write_seed_study(repos.root / "seed_study.csv", rows)
        return EXIT_OK
    report = service.campaign(config)
    analysis_service.write_report(repos.root / "report.csv", report.rows)
    for row in report.rows:
        if row.error:
            logger.warning(
                "Campaign cell failed",
                extra={"method": row.method, "d": row.d, "error": row.error},
            )
    return EXIT_OK


def cmd_report(args, repos: Repositories) -> int:
    path = args.report or str(repos.root / "report.csv")
    print(analysis_service.format_report(analysis_service.read_report(path)))
    return EXIT_OK


COMMANDS: Dict[str, Tuple[Callable, str]] = {
    "mesh": (cmd_mesh, "write the RVE mesh and its periodic pairing"),
    "paths": (cmd_paths, "write the random load paths"),
    "solve": (cmd_solve, "full-order solves of the training paths"),
    "train": (cmd_train, "fit the configured reduced-order models"),
    "rom-solve": (cmd_rom_solve, "replay the load paths through a stored model"),
    "corrdim": (cmd_corrdim, "correlation dimension of a snapshot matrix"),
    "campaign": (cmd_campaign, "train and validate every (method, d) cell"),
    "report": (cmd_report, "print a campaign report"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mor", description="Model order reduction for periodic RVEs")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    for name, (_, help_text) in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="campaign config JSON")
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--threads", type=int, help="worker thread cap")
        cmd.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE",
            help="dot-path config override",
        )
        if name in ("train", "corrdim"):
            cmd.add_argument("--snapshots", help="snapshot container (.mor)")
        if name == "corrdim":
            cmd.add_argument("--grid", type=int, default=100, help="scale grid points")
        if name == "rom-solve":
            cmd.add_argument("--model", help="model directory")
            cmd.add_argument(
                "--reference", action="store_true", help="also solve full-order and print errors"
            )
        if name == "campaign":
            cmd.add_argument("--seeds", type=int, nargs="+", help="run a seed study instead")
        if name == "report":
            cmd.add_argument("--report", help="report CSV, default <out>/report.csv")
    return parser


def dispatch(argv: Sequence[str]) -> int:
    """Run one subcommand; 0 on success, 1 on domain errors, 2 on usage errors"""
    try:
        args = build_parser().parse_args(list(argv))
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        settings = ComponentFactory.configure(threads=args.threads)
        repos = Repositories(args.out or settings.output_dir)
        handler, _ = COMMANDS[args.command]
        return handler(args, repos)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"usage error: invalid settings: {e.errors()[0]['msg']}", file=sys.stderr)
        return EXIT_USAGE
    except ApplicationError as e:
        logger.error("Command failed", extra={"error": e.to_dict()})
        print(e.to_line(), file=sys.stderr)
        return e.exit_code or EXIT_DOMAIN
