"""
Structured Tet10 cube meshes with carved spherical pores
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence

import numpy as np

from core.logger import get_logger
from exceptions import InvalidParameterError, PoreTouchesBoundaryError

logger = get_logger(__name__)

# Corner pairs of the six Tet10 midside nodes (local nodes 4..9)
EDGES = ((0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3))


@dataclass
class Mesh:
    """Quadratic tetrahedral mesh of a cube RVE (lengths in mm)"""

    nodes: np.ndarray
    elements: np.ndarray
    edge_length: float

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)

    @property
    def node_count(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def element_count(self) -> int:
        return int(self.elements.shape[0])

    @property
    def dof_count(self) -> int:
        return 3 * self.node_count

    def boundary_mask(self, rtol: float = 1e-9) -> np.ndarray:
        """Nodes on any outer cube face"""
        tol = rtol * self.edge_length
        return np.any(
            (self.nodes <= tol) | (self.nodes >= self.edge_length - tol), axis=1
        )

    def corner_centroids(self) -> np.ndarray:
        """Mean of the four corner nodes of every element"""
        return self.nodes[self.elements[:, :4]].mean(axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "edge_length": float(self.edge_length),
            "nodes": self.nodes.tolist(),
            "elements": self.elements.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Mesh":
        return cls(
            nodes=np.asarray(data["nodes"], dtype=float).reshape(-1, 3),
            elements=np.asarray(data["elements"], dtype=np.int64).reshape(-1, 10),
            edge_length=float(data["edge_length"]),
        )


@dataclass
class PoreSpec:
    """Spherical voids of a common radius"""

    centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    radius: float = 0.0

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1, 3)
        if self.radius < 0.0:
            raise InvalidParameterError("pore radius must be non-negative")

    @property
    def count(self) -> int:
        return int(self.centers.shape[0])


def _kuhn_offsets() -> np.ndarray:
    """Lattice offsets (6, 10, 3) of the Tet10 nodes of one cube, in half cells"""
    tets = []
    for perm in itertools.permutations(range(3)):
        corners = [np.zeros(3, dtype=np.int64)]
        for axis in perm:
            step = corners[-1].copy()
            step[axis] += 2
            corners.append(step)
        corners = np.array(corners)
        if np.linalg.det((corners[1:] - corners[0]).T.astype(float)) < 0.0:
            corners[[1, 2]] = corners[[2, 1]]
        mids = np.array([(corners[a] + corners[b]) // 2 for a, b in EDGES])
        tets.append(np.vstack([corners, mids]))
    return np.array(tets)


def generate_cube_mesh(edge_length: float, divisions: int) -> Mesh:
    """
    Structured cube mesh: ``divisions``^3 hexahedra, each split into six Kuhn
    tetrahedra along the main diagonal, promoted to Tet10.

    Every cube uses the same split, so opposite faces carry matching
    triangulations. The quadratic nodes coincide with the half-cell lattice,
    which numbers node ``(i, j, k)`` as ``i + m * (j + m * k)`` with
    ``m = 2 * divisions + 1``.
    """
    if edge_length <= 0.0:
        raise InvalidParameterError("edge_length must be positive")
    if divisions < 1:
        raise InvalidParameterError("divisions must be at least 1")

    m = 2 * divisions + 1
    half = edge_length / (2 * divisions)
    axis = np.arange(m)
    kk, jj, ii = np.meshgrid(axis, axis, axis, indexing="ij")
    nodes = np.column_stack([ii.ravel(), jj.ravel(), kk.ravel()]) * half

    cells = np.arange(divisions)
    ck, cj, ci = np.meshgrid(cells, cells, cells, indexing="ij")
    bases = 2 * np.column_stack([ci.ravel(), cj.ravel(), ck.ravel()])
    lattice = bases[:, None, None, :] + _kuhn_offsets()[None, :, :, :]
    lattice = lattice.reshape(-1, 10, 3)
    elements = lattice[..., 0] + m * (lattice[..., 1] + m * lattice[..., 2])

    mesh = Mesh(nodes=nodes, elements=elements, edge_length=edge_length)
    logger.debug(
        "Generated cube mesh",
        extra={"nodes": mesh.node_count, "elements": mesh.element_count},
    )
    return mesh


def carve_pores(mesh: Mesh, pores: PoreSpec) -> Mesh:
    """Remove every element whose corner centroid lies inside a pore sphere"""
    if pores.count == 0 or pores.radius == 0.0:
        return mesh

    length = mesh.edge_length
    touching = np.any(
        (pores.centers - pores.radius <= 0.0) | (pores.centers + pores.radius >= length),
        axis=1,
    )
    if np.any(touching):
        raise PoreTouchesBoundaryError(
            "Pore sphere intersects the cube surface",
            context={"pore": int(np.argmax(touching))},
        )

    centroids = mesh.corner_centroids()
    dist = np.linalg.norm(centroids[:, None, :] - pores.centers[None, :, :], axis=2)
    keep = ~np.any(dist < pores.radius, axis=1)
    elements = mesh.elements[keep]

    used = np.zeros(mesh.node_count, dtype=bool)
    used[elements.ravel()] = True
    orphaned = mesh.boundary_mask() & ~used
    if np.any(orphaned):
        raise PoreTouchesBoundaryError(
            "Carving leaves boundary nodes without elements",
            context={"node": int(np.argmax(orphaned))},
        )

    renumber = -np.ones(mesh.node_count, dtype=np.int64)
    renumber[used] = np.arange(int(used.sum()))
    carved = Mesh(
        nodes=mesh.nodes[used], elements=renumber[elements], edge_length=length
    )
    logger.info(
        "Carved pores",
        extra={
            "pores": pores.count,
            "removed_elements": mesh.element_count - carved.element_count,
            "nodes": carved.node_count,
        },
    )
    return carved


def build_rve_mesh(
    edge_length: float,
    divisions: int,
    pore_centers: Sequence[Sequence[float]] = (),
    pore_radius: float = 0.0,
) -> Mesh:
    """Cube mesh with its pores carved"""
    mesh = generate_cube_mesh(edge_length, divisions)
    return carve_pores(mesh, PoreSpec(centers=np.asarray(pore_centers), radius=pore_radius))
