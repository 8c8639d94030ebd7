"""
Test configuration and fixtures for pytest
"""

import os
import tempfile

import pytest
from fastapi.testclient import TestClient

# Set test environment variables before the settings are loaded
os.environ.update({
    "ENVIRONMENT": "test",
    "LOG_LEVEL": "WARNING",
    "LOG_FILE": "",
    "OUTPUT_DIR": tempfile.mkdtemp(prefix="casimir-sim-test-"),
    "SWEEP_WORKERS": "2",
    "DEFAULT_FOCK_MAX": "64",
})

from app.schemas.model import ModelParams, NumericsConfig  # noqa: E402
from app.services.result_export import ResultExporter  # noqa: E402
from app.services.scenario_runner import ScenarioRunner  # noqa: E402


@pytest.fixture
def params():
    """Reference parameters: E0 = 0.8, omega 0.5 -> 5.0, lambda = 0.01, tau = 1."""
    return ModelParams()


@pytest.fixture
def numerics():
    """Default numerical controls."""
    return NumericsConfig()


@pytest.fixture
def exporter(tmp_path):
    """Exporter writing into a per-test directory."""
    return ResultExporter(tmp_path)


@pytest.fixture
def runner(exporter):
    """Scenario runner with a small pool and a per-test output directory."""
    runner = ScenarioRunner(workers=2, exporter=exporter)
    yield runner
    runner.executor.shutdown(wait=True)


@pytest.fixture
def client():
    """Create a test client"""
    from app.main import app
    with TestClient(app) as test_client:
        yield test_client
