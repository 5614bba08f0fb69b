"""
Test configuration and utilities.
"""

import os

os.environ.setdefault("DATABASE_URL", "sqlite+aiosqlite:///./test.db")
os.environ.setdefault("SYNC_DATABASE_URL", "sqlite:///./test.db")
os.environ.setdefault("CELERY_TASK_ALWAYS_EAGER", "true")
os.environ.setdefault("CELERY_BROKER_URL", "memory://")
os.environ.setdefault("CELERY_RESULT_BACKEND", "cache+memory://")

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from main import app
from src.shared.database import Base, SessionLocal, sync_engine
from src.system_model import load_system

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
SYSTEMS = FIXTURES / "systems"
RUNS = FIXTURES / "runs"
CHAINS = FIXTURES / "chains"


@pytest.fixture
def client():
    """Create test client with fresh tables."""
    Base.metadata.create_all(bind=sync_engine)
    with TestClient(app) as test_client:
        yield test_client
    Base.metadata.drop_all(bind=sync_engine)


@pytest.fixture
def db_session():
    """Create test database session."""
    Base.metadata.create_all(bind=sync_engine)
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
        Base.metadata.drop_all(bind=sync_engine)


@pytest.fixture
def scalar_spec():
    """x' = x + u on U = [-1, 1]."""
    return load_system(SYSTEMS / "scalar_a1.cfg")


@pytest.fixture
def diag_spec():
    """x' = diag(1.5, -0.7) x + u on U = [-1, 1]^2."""
    return load_system(SYSTEMS / "diag_hyperbolic.cfg")


@pytest.fixture
def contraction_spec():
    return load_system(SYSTEMS / "contraction.cfg")


@pytest.fixture
def bistable_spec():
    return load_system(SYSTEMS / "bistable.cfg")


@pytest.fixture
def jordan_spec():
    return load_system(SYSTEMS / "jordan_shear.cfg")


@pytest.fixture
def double_integrator_spec():
    return load_system(SYSTEMS / "double_integrator.cfg")


@pytest.fixture
def blowup_spec():
    """x' = x^2 + u, which leaves every bounded set from x0 > 0."""
    return load_system(SYSTEMS / "blowup.cfg")


@pytest.fixture
def fixtures_dir():
    return FIXTURES
