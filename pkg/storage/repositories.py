"""
Repository implementations for the artifact directory
"""

import json
import shutil
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from core.base import BaseReducer, BaseRepository
from core.logger import get_logger
from exceptions import InvalidParameterError, ResourceNotFoundError
from fem.mesh import Mesh
from fem.periodic import PeriodicPairing
from models import LoadPath
from reduction.clustering import LpodModel, LpodParams
from reduction.pod import PodBasis, SnapshotSet
from rom.models import LpodRom, ManlRom, PodRom, TwoStageRom
from storage.matrix_container import read_matrix, write_matrix

logger = get_logger(__name__)


def dump_json(path: Path, data: Any) -> Path:
    """Deterministic JSON (sorted keys, fixed indentation)"""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def load_json(path: Path) -> Any:
    if not path.is_file():
        raise ResourceNotFoundError("File not found", context={"path": str(path)})
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidParameterError(
            f"Malformed JSON: {e}", context={"path": str(path)}
        ) from e


class _FileRepository(BaseRepository):
    """Items stored as ``<root>/<name><suffix>``"""

    suffix = ""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def path(self, name: str) -> Path:
        return self.root / f"{name}{self.suffix}"

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def delete(self, name: str) -> bool:
        path = self.path(name)
        if not path.exists():
            return False
        if path.is_dir():
            shutil.rmtree(path)
        else:
            path.unlink()
        return True

    def list(self) -> List[str]:
        if not self.root.is_dir():
            return []
        return sorted(
            p.name[: len(p.name) - len(self.suffix)] if self.suffix else p.name
            for p in self.root.iterdir()
            if p.name.endswith(self.suffix)
        )


class MatrixRepository(_FileRepository):
    """Plain MOR1 matrices"""

    suffix = ".mor"

    def get(self, name: str) -> np.ndarray:
        return read_matrix(self.path(name))

    def save(self, name: str, item: np.ndarray) -> str:
        return str(write_matrix(self.path(name), item))


class SnapshotRepository(_FileRepository):
    """Snapshot matrix plus its per-column load metadata"""

    suffix = ".mor"

    def get(self, name: str) -> SnapshotSet:
        U = read_matrix(self.path(name))
        meta_path = self.path(name).with_suffix(".json")
        meta = load_json(meta_path)["columns"] if meta_path.exists() else []
        return SnapshotSet(U=U, meta=meta)

    def save(self, name: str, item: SnapshotSet) -> str:
        path = write_matrix(self.path(name), item.U)
        dump_json(path.with_suffix(".json"), {"columns": item.meta})
        logger.info("Saved snapshots", extra={"path": str(path), "shape": list(item.U.shape)})
        return str(path)

    def delete(self, name: str) -> bool:
        self.path(name).with_suffix(".json").unlink(missing_ok=True)
        return super().delete(name)


class MeshRepository(_FileRepository):
    """Mesh JSON with the periodic pairing embedded"""

    suffix = ".json"

    def get(self, name: str) -> Tuple[Mesh, PeriodicPairing]:
        data = load_json(self.path(name))
        mesh = Mesh.from_dict(data)
        pairing = PeriodicPairing.from_master_map(
            np.asarray(data["pairing"]["master_of"]), int(data["pairing"]["pinned_node"])
        )
        return mesh, pairing

    def save(self, name: str, item: Tuple[Mesh, PeriodicPairing]) -> str:
        mesh, pairing = item
        data = mesh.to_dict()
        data["pairing"] = pairing.to_dict()
        return str(dump_json(self.path(name), data))


class LoadPathRepository(_FileRepository):
    """Load paths as JSON"""

    suffix = ".json"

    def get(self, name: str) -> List[LoadPath]:
        data = load_json(self.path(name))
        return [LoadPath.from_dict(item) for item in data["paths"]]

    def save(self, name: str, item: List[LoadPath]) -> str:
        return str(dump_json(self.path(name), {"paths": [p.to_dict() for p in item]}))


class ModelRepository(_FileRepository):
    """
    Trained models, one directory each: ``manifest.json`` plus MOR1
    containers for every matrix the model needs online.
    """

    def get(self, name: str) -> BaseReducer:
        folder = self.path(name)
        manifest = load_json(folder / "manifest.json")
        kind = manifest["kind"]

        if kind == "pod":
            return PodRom(psi=read_matrix(folder / "psi.mor"))

        if kind == "lpod":
            k = manifest["k"]
            bases = [
                PodBasis(
                    psi=read_matrix(folder / f"basis_{j}.mor"),
                    eigenvalues=read_matrix(folder / f"eigenvalues_{j}.mor").ravel(),
                )
                for j in range(k)
            ]
            model = LpodModel(
                centroids=read_matrix(folder / "centroids.mor"),
                clusters=[np.asarray(c, dtype=np.int64) for c in manifest["clusters"]],
                core_clusters=[np.asarray(c, dtype=np.int64) for c in manifest["core_clusters"]],
                bases=bases,
                params=LpodParams(**manifest["params"]),
                seed=manifest["seed"],
            )
            return LpodRom(model=model)

        if kind in ("manl", "two_stage"):
            optional = {
                key: read_matrix(folder / f"{key}.mor")
                for key in ("psi_outer", "psi_global")
                if (folder / f"{key}.mor").exists()
            }
            cls = TwoStageRom if kind == "two_stage" else ManlRom
            return cls(
                U_ambient=read_matrix(folder / "U_ambient.mor"),
                Y=read_matrix(folder / "Y.mor"),
                method=manifest["method"],
                n_lin=manifest["n_lin"],
                orthonormalise=manifest["orthonormalise"],
                linearisation=manifest["linearisation"],
                graph_params=manifest.get("graph", {}),
                **optional,
            )

        raise InvalidParameterError("Unknown model kind", context={"kind": kind})

    def save(self, name: str, item: BaseReducer) -> str:
        folder = self.path(name)
        folder.mkdir(parents=True, exist_ok=True)
        manifest: Dict[str, Any] = item.describe()

        if isinstance(item, PodRom):
            write_matrix(folder / "psi.mor", item.psi)
        elif isinstance(item, LpodRom):
            model = item.model
            write_matrix(folder / "centroids.mor", model.centroids)
            for j, basis in enumerate(model.bases):
                write_matrix(folder / f"basis_{j}.mor", basis.psi)
                write_matrix(folder / f"eigenvalues_{j}.mor", basis.eigenvalues)
            manifest.update(
                clusters=[c.tolist() for c in model.clusters],
                core_clusters=[c.tolist() for c in model.core_clusters],
                params=vars(model.params).copy(),
                seed=model.seed,
            )
        elif isinstance(item, ManlRom):
            write_matrix(folder / "U_ambient.mor", item.U_ambient)
            write_matrix(folder / "Y.mor", item.Y)
            if item.psi_outer is not None:
                write_matrix(folder / "psi_outer.mor", item.psi_outer)
            if item.psi_global is not None:
                write_matrix(folder / "psi_global.mor", item.psi_global)
        else:
            raise InvalidParameterError(
                "Unsupported model type", context={"type": type(item).__name__}
            )

        dump_json(folder / "manifest.json", manifest)
        logger.info("Saved model", extra={"path": str(folder), "kind": manifest["kind"]})
        return str(folder)
