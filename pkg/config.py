"""
Configuration management for the RVE model order reduction toolkit
"""

import logging

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class Settings(BaseSettings):
    """Process settings loaded from ``MOR_*`` environment variables"""

    # Application
    app_name: str = Field(default="rve-manifold-rom", description="Application name")
    app_version: str = Field(default="0.1.0", description="Application version")

    # Logging (MOR_LOG)
    log: str = Field(default="info", description="Log level: error, info or debug")

    # Execution
    threads: int = Field(
        default=1, ge=1, description="Worker threads for per-path solves"
    )
    output_dir: str = Field(default="out", description="Default output directory")

    # Solver defaults, overridden by the solver section of a campaign config
    res_max: float = Field(
        default=1e-6, gt=0.0, description="Absolute residual max-norm tolerance (N)"
    )
    max_iterations: int = Field(
        default=25, ge=1, description="Newton iteration budget per load step"
    )
    lloyd_restarts: int = Field(
        default=100, ge=1, description="Restart budget for Lloyd clustering"
    )

    model_config = SettingsConfigDict(
        env_prefix="MOR_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log")
    @classmethod
    def _check_log(cls, value: str) -> str:
        value = value.lower()
        if value not in LOG_LEVELS:
            raise ValueError(f"log must be one of {sorted(LOG_LEVELS)}")
        return value

    @property
    def log_level(self) -> int:
        """Numeric logging level"""
        return LOG_LEVELS[self.log]


def get_settings() -> Settings:
    """Get application settings"""
    return Settings()
