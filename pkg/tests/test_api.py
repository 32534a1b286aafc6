# =====================================================
# TESTS - API HTTP del registro de corridas
# =====================================================

from types import SimpleNamespace

import httpx
import pytest
from alembic import command
from alembic.config import Config as AlembicConfig
from fastapi import status
from fastapi.testclient import TestClient
from sqlalchemy import inspect
from sqlalchemy.orm import sessionmaker

from app.database import get_db, init_db, make_engine
from main import app
from tests.conftest import ROOT


@pytest.fixture
def client(tmp_path):
    engine = make_engine(f"sqlite:///{tmp_path / 'runs.db'}")
    init_db(bind=engine)
    TestingSession = sessionmaker(autocommit=False, autoflush=False, bind=engine)

    def override_get_db():
        db = TestingSession()
        try:
            yield db
        finally:
            db.close()

    app.dependency_overrides[get_db] = override_get_db
    yield TestClient(app)
    app.dependency_overrides.clear()
    engine.dispose()


def _scenario(map_path: str) -> str:
    return "\n".join([
        "Scenario.name = api",
        "Scenario.duration = 300",
        f"Scenario.map = {map_path}",
        "Group1.count = 5",
        "Group1.speedMin = 5",
        "Group1.speedMax = 10",
        "Group1.router = epidemic",
        "Traffic.intervalMin = 20",
        "Traffic.intervalMax = 30",
        "Traffic.sizeMin = 10k",
        "Traffic.sizeMax = 50k",
    ])


# ==================== CORRIDAS ====================

def test_create_and_fetch_run(client, grid_map_path):
    response = client.post("/api/v1/runs/", json={"config": _scenario(grid_map_path), "seed": 3})
    assert response.status_code == status.HTTP_201_CREATED
    body = response.json()
    assert body["scenario_id"] == "api"
    assert body["seed"] == 3
    assert body["router"] == "epidemic"
    assert body["created"] > 0

    fetched = client.get(f"/api/v1/runs/{body['id']}")
    assert fetched.status_code == status.HTTP_200_OK
    assert fetched.json()["delivered"] == body["delivered"]


def test_router_override_and_filter(client, grid_map_path):
    client.post("/api/v1/runs/", json={"config": _scenario(grid_map_path)})
    client.post("/api/v1/runs/", json={"config": _scenario(grid_map_path), "router": "snw"})
    everything = client.get("/api/v1/runs/").json()
    assert [r["router"] for r in everything] == ["epidemic", "snw"]
    only_snw = client.get("/api/v1/runs/", params={"router_name": "snw"}).json()
    assert len(only_snw) == 1


def test_invalid_scenario_is_bad_request(client, grid_map_path):
    text = _scenario(grid_map_path) + "\nGroup1.bufferSize = -5"
    response = client.post("/api/v1/runs/", json={"config": text})
    assert response.status_code == status.HTTP_400_BAD_REQUEST
    assert "Group1.bufferSize" in response.json()["detail"]


def test_unknown_router_is_rejected_by_schema(client, grid_map_path):
    response = client.post("/api/v1/runs/", json={"config": _scenario(grid_map_path), "router": "flooding"})
    assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY


def test_missing_run(client):
    assert client.get("/api/v1/runs/999").status_code == status.HTTP_404_NOT_FOUND
    assert client.delete("/api/v1/runs/999").status_code == status.HTTP_404_NOT_FOUND


def test_delete_run(client, grid_map_path):
    run_id = client.post("/api/v1/runs/", json={"config": _scenario(grid_map_path)}).json()["id"]
    assert client.delete(f"/api/v1/runs/{run_id}").status_code == status.HTTP_204_NO_CONTENT
    assert client.get(f"/api/v1/runs/{run_id}").status_code == status.HTTP_404_NOT_FOUND


# ==================== INFO ====================

@pytest.mark.asyncio
async def test_health_and_router_catalog():
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as ac:
        health = await ac.get("/health")
        catalog = await ac.get("/api/v1/routers/")
    assert health.json()["status"] == "ok"
    assert {r["name"] for r in catalog.json()} == {"epidemic", "snw", "maxprop", "mlmaxprop"}


# ==================== MIGRACIONES ====================

def _alembic_config(url: str) -> AlembicConfig:
    config = AlembicConfig()
    config.set_main_option("script_location", str(ROOT / "alembic"))
    config.cmd_opts = SimpleNamespace(x=[f"database_url={url}"])
    return config


def test_migration_targets_the_given_database(tmp_path):
    url = f"sqlite:///{tmp_path / 'registry.db'}"
    config = _alembic_config(url)
    command.upgrade(config, "head")
    engine = make_engine(url)
    try:
        assert inspect(engine).has_table("run_reports")
        command.downgrade(config, "base")
        assert not inspect(engine).has_table("run_reports")
    finally:
        engine.dispose()
