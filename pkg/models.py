"""
Pydantic models for experiment configuration and report rows, plus load paths
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class MethodName(str, Enum):
    """Reduction method family"""

    POD = "pod"
    LPOD = "lpod"
    LEM = "lem"
    LLE = "lle"


class GraphRule(str, Enum):
    """Neighbour graph construction rule"""

    EPS_BALL = "eps-ball"
    SYMMETRIC_KNN = "symmetric-knn"
    MUTUAL_KNN = "mutual-knn"


class Linearisation(str, Enum):
    """How a manifold model turns reduced coordinates into a Galerkin projector"""

    LOCAL = "local"
    GLOBAL = "global"


class MeshConfig(BaseModel):
    """Cube RVE geometry"""

    edge_length: float = Field(default=6.0, gt=0.0, description="Cube edge length (mm)")
    divisions: int = Field(default=6, ge=1, description="Hexahedra per axis")
    pore_centers: List[Tuple[float, float, float]] = Field(
        default=[(2.0, 2.0, 2.0), (4.0, 4.0, 4.0)],
        description="Pore centres (mm)",
    )
    pore_radius: float = Field(default=1.5, ge=0.0, description="Pore radius (mm)")
    quadrature: int = Field(
        default=4, description="Tetrahedron quadrature rule (4 or 5 points)"
    )

    @field_validator("quadrature")
    @classmethod
    def _check_rule(cls, value: int) -> int:
        if value not in (4, 5):
            raise ValueError("quadrature must be 4 or 5")
        return value


class MaterialConfig(BaseModel):
    """Neo-Hooke material in engineering constants"""

    E: float = Field(default=1000.0, gt=0.0, description="Young's modulus (N/mm^2)")
    nu: float = Field(default=0.2, gt=-1.0, lt=0.5, description="Poisson ratio")


class PathsConfig(BaseModel):
    """Random load path protocol"""

    n_train: int = Field(default=10, ge=1, description="Training paths")
    n_val: int = Field(default=10, ge=0, description="Additional validation paths")
    steps: int = Field(default=10, ge=1, description="Load steps per path")
    dH_lp: float = Field(default=0.03, ge=0.0, description="Path direction step size")
    dH_ls: float = Field(default=0.015, ge=0.0, description="Per-step perturbation size")
    seed: int = Field(default=42, ge=0, description="Path sampling seed")

    @property
    def total(self) -> int:
        return self.n_train + self.n_val


class GraphConfig(BaseModel):
    """Neighbour graph parameters for LEM/LLE"""

    rule: GraphRule = Field(default=GraphRule.SYMMETRIC_KNN, description="Graph rule")
    k: int = Field(default=30, ge=1, description="Neighbours for kNN rules")
    eps: Optional[float] = Field(default=None, gt=0.0, description="Ball radius")
    t: float = Field(default=math.inf, gt=0.0, description="Gaussian weight width")

    @model_validator(mode="after")
    def _check_eps(self) -> "GraphConfig":
        if self.rule == GraphRule.EPS_BALL and self.eps is None:
            raise ValueError("eps-ball graphs need eps")
        return self


class LpodConfig(BaseModel):
    """Clustered local basis parameters"""

    k: int = Field(default=6, ge=1, description="Number of clusters")
    r: float = Field(default=1.0, ge=0.0, description="Softening ratio")
    core_min: int = Field(default=7, ge=1, description="Minimal core cluster size")
    size_min: int = Field(default=30, ge=1, description="Minimal enlarged cluster size")
    size_max: int = Field(default=50, ge=1, description="Maximal enlarged cluster size")
    seed: int = Field(default=42, ge=0, description="Clustering seed")

    @model_validator(mode="after")
    def _check_bounds(self) -> "LpodConfig":
        if self.size_min > self.size_max:
            raise ValueError("size_min must not exceed size_max")
        return self


class MethodConfig(BaseModel):
    """One reduction method and the dimensions it is evaluated at"""

    name: MethodName = Field(description="Method family")
    d: List[int] = Field(default=[15], min_length=1, description="Reduced dimensions")
    linearisation: Linearisation = Field(
        default=Linearisation.LOCAL, description="Manifold linearisation"
    )
    orthonormalise: bool = Field(default=True, description="QR the local tangent")
    n_lin: int = Field(default=20, ge=1, description="Neighbours for linearisation")
    delta_reg: float = Field(default=0.001, ge=0.0, description="LLE regulariser")
    two_stage: bool = Field(default=False, description="POD pre-compression")
    d_bar: Optional[int] = Field(
        default=None, ge=1, description="Intermediate dimension, default min(s-1, 60)"
    )
    graph: GraphConfig = Field(default_factory=GraphConfig)
    lpod: LpodConfig = Field(default_factory=LpodConfig)

    @field_validator("d")
    @classmethod
    def _check_dims(cls, value: List[int]) -> List[int]:
        if any(d < 1 for d in value):
            raise ValueError("dimensions must be positive")
        return value

    @property
    def label(self) -> str:
        """Report label, e.g. ``LEM-local`` or ``LLE-local-2stage``"""
        if self.name in (MethodName.POD, MethodName.LPOD):
            return self.name.value.upper()
        label = f"{self.name.value.upper()}-{self.linearisation.value}"
        if not self.orthonormalise:
            label += "-noqr"
        if self.two_stage:
            label += "-2stage"
        return label


class SolverConfig(BaseModel):
    """Newton solver settings"""

    res_max: float = Field(default=1e-6, gt=0.0, description="Residual tolerance (N)")
    max_iter: int = Field(default=25, ge=1, description="Iterations per load step")
    n_load_steps: int = Field(
        default=1, ge=1, description="Sub-increments between path entries"
    )


class CampaignConfig(BaseModel):
    """Complete experiment description"""

    mesh: MeshConfig = Field(default_factory=MeshConfig)
    material: MaterialConfig = Field(default_factory=MaterialConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    methods: List[MethodConfig] = Field(
        default_factory=lambda: [MethodConfig(name=MethodName.POD)],
        description="Methods to train and evaluate",
    )
    solver: SolverConfig = Field(default_factory=SolverConfig)


class ReportRow(BaseModel):
    """One (method, d) cell of an experiment report"""

    method: str = Field(description="Method label")
    d: int = Field(description="Reduced dimension")
    E_mean_pct: float = Field(description="Mean relative error (%)")
    E_max_pct: float = Field(description="Maximal relative error (%)")
    wall_s: float = Field(description="Online wall time over all paths (s)")
    converged_paths: int = Field(description="Paths solved to the end")
    total_paths: int = Field(default=0, description="Paths attempted")
    error: Optional[str] = Field(default=None, description="Cell failure, if any")


class SeedStudyRow(BaseModel):
    """Spread of one (method, d) cell across path seeds"""

    method: str
    d: int
    seeds: List[int]
    E_mean_pct_mean: float
    E_mean_pct_min: float
    E_mean_pct_max: float
    E_max_pct_mean: float
    E_max_pct_min: float
    E_max_pct_max: float


@dataclass
class LoadPath:
    """
    Random macroscopic load path. Step n adds
    ``dH_lp * N_LP + dH_ls * N_LS[n]`` to the previous gradient, starting from 0.
    """

    id: int
    N_LP: np.ndarray
    N_LS: np.ndarray
    dH_lp: float
    dH_ls: float
    H_steps: np.ndarray

    @property
    def steps(self) -> int:
        return int(self.H_steps.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "N_LP": self.N_LP.tolist(),
            "N_LS": self.N_LS.tolist(),
            "dH_lp": self.dH_lp,
            "dH_ls": self.dH_ls,
            "H_steps": self.H_steps.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LoadPath":
        return cls(
            id=int(data["id"]),
            N_LP=np.asarray(data["N_LP"], dtype=float),
            N_LS=np.asarray(data["N_LS"], dtype=float),
            dH_lp=float(data["dH_lp"]),
            dH_ls=float(data["dH_ls"]),
            H_steps=np.asarray(data["H_steps"], dtype=float),
        )
