"""Pytest fixtures and configuration."""

from pathlib import Path

import numpy as np
import pytest

from src.observability import configure_logging
from src.ring.field import DEFAULT_MODULUS, SMALL_TEST_MODULUS, PrimeRing
from src.ring.prg import Prg, seed_from_int
from src.schemas.experiment import ExperimentConfig


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    """Keep test output readable: warnings and above, console format."""
    configure_logging("WARNING", "console")


@pytest.fixture
def small_ring() -> PrimeRing:
    """Z_97, small enough for statistical checks."""
    return PrimeRing(SMALL_TEST_MODULUS)


@pytest.fixture
def ring() -> PrimeRing:
    """Z_p with p = 2^61 - 1."""
    return PrimeRing(DEFAULT_MODULUS)


@pytest.fixture
def seed() -> bytes:
    return seed_from_int(1234)


@pytest.fixture
def prg(seed) -> Prg:
    return Prg(seed, 0, "tests")


@pytest.fixture
def np_rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def small_config_data(**overrides) -> dict:
    """A tiny but valid experiment: 6 clients, 3 classes, 4 features, 3 rounds."""
    data = {
        "seed": 7,
        "rounds": 3,
        "task": {
            "d_feat": 4,
            "num_classes": 3,
            "num_clients": 6,
            "q": 0.5,
            "samples_per_client": 30,
            "test_size": 200,
            "calibration_size": 50,
        },
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return data


@pytest.fixture
def small_config() -> ExperimentConfig:
    return ExperimentConfig.model_validate(small_config_data())


@pytest.fixture
def small_mpc_config() -> ExperimentConfig:
    return ExperimentConfig.model_validate(small_config_data(mode="mpc"))


@pytest.fixture
def run_dir(tmp_path) -> Path:
    return tmp_path / "run"
