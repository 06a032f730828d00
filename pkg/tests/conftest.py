"""
Pytest configuration and fixtures for diffeo-trees tests.
"""
from typing import Generator

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from app.amplitudes import FeynmanRules, KinematicSampler
from app.config import Settings
from app.exactalg import Polynomial, a_var, x_var
from app.main import app
from app.models import RunConfig
from app.series import Diffeomorphism


@pytest.fixture
def test_settings() -> Settings:
    """Settings with plain-text logging, easier to read in tests."""
    return Settings(log_level="DEBUG", json_logging=False, threads=2)


@pytest.fixture
def generic_diffeo() -> Diffeomorphism:
    """F = t + a1 t^2 + ... + a7 t^8 with symbolic coefficients."""
    return Diffeomorphism.generic(8)


@pytest.fixture
def rules(generic_diffeo: Diffeomorphism) -> FeynmanRules:
    return FeynmanRules(generic_diffeo)


@pytest.fixture
def sampler() -> KinematicSampler:
    """Seeded sampler; identical seeds give identical points."""
    return KinematicSampler(seed=42)


@pytest.fixture
def small_run_config() -> RunConfig:
    return RunConfig(order=4, trials=2, seed=7)


@pytest.fixture
def a1() -> Polynomial:
    return Polynomial.variable(a_var(1))


@pytest.fixture
def a2() -> Polynomial:
    return Polynomial.variable(a_var(2))


@pytest.fixture
def x() -> "XVariables":
    return XVariables()


class XVariables:
    """x[i] is the Bell argument indeterminate x_i."""

    def __getitem__(self, i: int) -> Polynomial:
        return Polynomial.variable(x_var(i))


@pytest.fixture
def cli_runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def test_client() -> Generator[TestClient, None, None]:
    """Create a test client for the HTTP surface."""
    app.dependency_overrides = {}
    with TestClient(app) as client:
        yield client


@pytest.fixture
def b3_poly() -> str:
    """b_3 in canonical form."""
    return "12*a1^2 - 6*a2"
