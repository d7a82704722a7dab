"""Application configuration using Pydantic Settings."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process settings loaded from environment variables.

    Experiment parameters live in the YAML experiment config, not here.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",  # Ignore extra env vars that don't match field names
    )

    # Application
    app_name: str = "RAIN Simulator"
    app_version: str = "0.1.0"

    # Output
    # Overrides the experiment file's output_dir; --out still wins
    output_dir: Path | None = Field(
        default=None,
        validation_alias=AliasChoices("rain_output_dir", "output_dir"),
    )

    # Simulation
    client_workers: int = Field(
        default=4,
        ge=1,
        validation_alias=AliasChoices("rain_client_workers", "client_workers"),
    )

    # Observability
    log_level: str = Field(
        default="INFO",
        validation_alias=AliasChoices("rain_log_level", "log_level"),
    )
    log_format: Literal["json", "console"] = Field(
        default="json",
        validation_alias=AliasChoices("rain_log_format", "log_format"),
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()
