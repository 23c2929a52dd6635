"""Shared fixtures: the reference 10x10 setup and a session-trained dictionary."""
import pytest

from spts.config import ExperimentConfig
from spts.core import CircuitParams, GridGeometry
from spts.experiments import train_dictionary

REFERENCE_SEED = 12345


@pytest.fixture(scope="session")
def geometry():
    return GridGeometry(10, 10)


@pytest.fixture(scope="session")
def circuit():
    return CircuitParams()


@pytest.fixture(scope="session")
def default_cfg(geometry, circuit):
    return ExperimentConfig(REFERENCE_SEED, geometry, circuit)


@pytest.fixture(scope="session")
def trained_psi(default_cfg):
    return train_dictionary(default_cfg)
