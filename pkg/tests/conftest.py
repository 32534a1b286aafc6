# =====================================================
# FIXTURES - Mapas y logging para las pruebas
# =====================================================

from pathlib import Path

import pytest
from loguru import logger

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(autouse=True)
def quiet_logs():
    """Sin archivo de log durante las pruebas"""
    logger.remove()
    logger.add(lambda _: None, level="DEBUG")
    yield


def write_map(path: Path, *lines: str) -> str:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def line_map(tmp_path) -> str:
    """Tres waypoints en linea: 0 -- 50 -- 1000"""
    return write_map(tmp_path / "line.wkt", "LINESTRING (0 0, 50 0, 1000 0)")


@pytest.fixture
def grid_map_path(tmp_path) -> str:
    """Grilla 3x3 de 100 m"""
    return write_map(
        tmp_path / "grid.wkt",
        "LINESTRING (0 0, 100 0, 200 0)",
        "LINESTRING (0 100, 100 100, 200 100)",
        "LINESTRING (0 200, 100 200, 200 200)",
        "LINESTRING (0 0, 0 100, 0 200)",
        "LINESTRING (100 0, 100 100, 100 200)",
        "LINESTRING (200 0, 200 100, 200 200)",
    )
