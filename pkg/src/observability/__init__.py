"""Observability helpers."""

from src.observability.logging_config import configure_logging

__all__ = ["configure_logging"]
