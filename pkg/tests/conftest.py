"""
Pytest configuration and fixtures
"""

import json
from dataclasses import dataclass
from typing import List

import numpy as np
import pytest

from fem.material import MaterialParams
from fem.mesh import Mesh, build_rve_mesh, generate_cube_mesh
from fem.periodic import PeriodicPairing, build_periodic_pairing
from fem.solver import FullOrderProblem, SolverSettings
from models import LoadPath
from reduction.pod import SnapshotSet
from services.experiment_service import (
    generate_load_paths,
    snapshot_set,
    solve_reference_paths,
)
from utils.helpers import RngStream

# Small porous RVE: the centre cube of a 3x3x3 grid is carved out
POROUS_SMALL = {"edge_length": 6.0, "divisions": 3, "pore_centers": [(3.0, 3.0, 3.0)], "pore_radius": 1.2}


@pytest.fixture
def material() -> MaterialParams:
    """Table defaults E = 1000, nu = 0.2"""
    return MaterialParams.from_youngs(1000.0, 0.2)


@pytest.fixture
def unit_cube() -> Mesh:
    """One hexahedron split into six Tet10"""
    return generate_cube_mesh(6.0, 1)


@pytest.fixture
def cube_mesh() -> Mesh:
    """Homogeneous 2x2x2 cube"""
    return generate_cube_mesh(6.0, 2)


@pytest.fixture(scope="session")
def porous_small() -> Mesh:
    return build_rve_mesh(**POROUS_SMALL)


@pytest.fixture(scope="session")
def porous_pairing(porous_small) -> PeriodicPairing:
    return build_periodic_pairing(porous_small)


@pytest.fixture
def rng() -> RngStream:
    return RngStream(42)


@dataclass
class TrainingData:
    """Full-order problem, its load paths and converged reference solutions"""

    problem: FullOrderProblem
    paths: List[LoadPath]
    references: List[List[np.ndarray]]
    snapshots: SnapshotSet
    settings: SolverSettings


@pytest.fixture(scope="session")
def training_data(porous_small, porous_pairing) -> TrainingData:
    """Three paths of three steps on the small porous RVE (s = 10)"""
    mat = MaterialParams.from_youngs(1000.0, 0.2)
    problem = FullOrderProblem(porous_small, porous_pairing, mat)
    settings = SolverSettings(res_max=1e-8, max_iterations=25)
    paths = generate_load_paths(3, RngStream(42), dH_lp=0.03, dH_ls=0.015, steps=3)
    references = solve_reference_paths(problem, paths, settings)
    return TrainingData(
        problem=problem,
        paths=paths,
        references=references,
        snapshots=snapshot_set(paths, references),
        settings=settings,
    )


@pytest.fixture
def campaign_dict() -> dict:
    """Tiny campaign on the small porous RVE"""
    return {
        "mesh": {**POROUS_SMALL, "pore_centers": [[3.0, 3.0, 3.0]]},
        "material": {"E": 1000.0, "nu": 0.2},
        "paths": {"n_train": 2, "n_val": 1, "steps": 2, "dH_lp": 0.03, "dH_ls": 0.015, "seed": 42},
        "methods": [{"name": "pod", "d": [1, 4]}],
        "solver": {"res_max": 1e-8, "max_iter": 25},
    }


@pytest.fixture
def campaign_file(tmp_path, campaign_dict):
    path = tmp_path / "campaign.json"
    path.write_text(json.dumps(campaign_dict), encoding="utf-8")
    return path


def circle_points(count: int, ambient: int = 10, seed: int = 0) -> np.ndarray:
    """Random points on a unit circle isometrically placed in R^ambient"""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    basis, _ = np.linalg.qr(rng.standard_normal((ambient, 2)))
    return basis @ np.vstack([np.cos(theta), np.sin(theta)])


def sphere_points(count: int, ambient: int = 10, seed: int = 0) -> np.ndarray:
    """Random points on a unit 2-sphere isometrically placed in R^ambient"""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((3, count))
    x /= np.linalg.norm(x, axis=0)
    basis, _ = np.linalg.qr(rng.standard_normal((ambient, 3)))
    return basis @ x
