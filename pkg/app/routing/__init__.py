# =====================================================
# ROUTING - Registro de protocolos
# =====================================================

from typing import Dict, List, Type

from app.routing.base import Router
from app.routing.epidemic import EpidemicRouter
from app.routing.maxprop import MaxPropRouter
from app.routing.mlmaxprop import MLMaxPropRouter
from app.routing.spray_and_wait import SprayAndWaitRouter
from app.schemas import RouterInfo, RouterParams

ROUTERS: Dict[str, Type[Router]] = {
    EpidemicRouter.name: EpidemicRouter,
    SprayAndWaitRouter.name: SprayAndWaitRouter,
    MaxPropRouter.name: MaxPropRouter,
    MLMaxPropRouter.name: MLMaxPropRouter,
}

# Parametros que usa cada router
_ROUTER_PARAMS = {
    "epidemic": (),
    "snw": ("snw_copies",),
    "maxprop": ("hop_threshold",),
    "mlmaxprop": ("hop_threshold", "ml_threshold", "model_path"),
}


def create_router(params: RouterParams, host, world) -> Router:
    return ROUTERS[params.name](params, host, world)


def router_catalog() -> List[RouterInfo]:
    """Routers disponibles con sus parametros por defecto"""
    defaults = RouterParams().model_dump()
    return [
        RouterInfo(
            name=name,
            description=cls.description,
            defaults={key: defaults[key] for key in _ROUTER_PARAMS[name]},
        )
        for name, cls in ROUTERS.items()
    ]


__all__ = ["ROUTERS", "Router", "create_router", "router_catalog"]
