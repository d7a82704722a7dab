"""RAIN - sign-space robust aggregation under shuffle-model differential privacy."""

__version__ = "0.1.0"
