# =====================================================
# RUTAS - Catalogo de routers
# =====================================================

from typing import List

from fastapi import APIRouter

from app.routing import router_catalog
from app.schemas import RouterInfo

router = APIRouter()


@router.get("/", response_model=List[RouterInfo])
async def get_routers():
    """Routers disponibles y sus parametros por defecto"""
    return router_catalog()
