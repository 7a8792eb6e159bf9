"""
Component factory: process settings, services and artifact repositories
"""

from pathlib import Path
from typing import Optional, Union

from config import Settings, get_settings
from core.logger import get_logger, set_level
from services.experiment_service import ExperimentService
from storage.repositories import (
    LoadPathRepository,
    MatrixRepository,
    MeshRepository,
    ModelRepository,
    SnapshotRepository,
)

logger = get_logger(__name__)


class ComponentFactory:
    """Factory for creating and managing component instances"""

    _settings: Optional[Settings] = None
    _experiment_service: Optional[ExperimentService] = None

    @classmethod
    def get_settings(cls) -> Settings:
        """Get or create settings - Singleton pattern"""
        if cls._settings is None:
            cls._settings = get_settings()
            set_level(cls._settings.log_level)
            logger.debug("Loaded settings", extra={"threads": cls._settings.threads})
        return cls._settings

    @classmethod
    def configure(cls, threads: Optional[int] = None) -> Settings:
        """Apply command-line overrides on top of the environment settings"""
        settings = cls.get_settings()
        if threads is not None:
            cls._settings = settings.model_copy(update={"threads": threads})
            cls._experiment_service = None
        return cls._settings

    @classmethod
    def get_experiment_service(cls) -> ExperimentService:
        if cls._experiment_service is None:
            settings = cls.get_settings()
            cls._experiment_service = ExperimentService(
                threads=settings.threads, lloyd_restarts=settings.lloyd_restarts
            )
        return cls._experiment_service

    @classmethod
    def reset(cls):
        """Reset instances - useful for testing"""
        cls._settings = None
        cls._experiment_service = None


class Repositories:
    """Repositories rooted in one output directory"""

    def __init__(self, out: Union[str, Path]):
        self.root = Path(out)
        self.matrices = MatrixRepository(self.root)
        self.snapshots = SnapshotRepository(self.root)
        self.meshes = MeshRepository(self.root)
        self.paths = LoadPathRepository(self.root)
        self.models = ModelRepository(self.root / "models")
