# =====================================================
# HELPERS - Escenarios chicos para las pruebas
# =====================================================

from typing import List, Optional

from app.schemas import GroupConfig, RouterParams, ScenarioConfig, TrafficConfig


def static_pair(map_path: str, router: str = "epidemic", size: int = 1000, bitrate: float = 250_000,
                duration: float = 60, stop: Optional[float] = 10, collect: bool = False,
                far: bool = False, **router_params) -> ScenarioConfig:
    """Host 0 (origen) y host 1 (destino) fijos; un mensaje en t=10"""
    params = RouterParams(name=router, **router_params)
    groups = [
        GroupConfig(count=1, movement="stationary", waypoint=0, range=100, bitrate=bitrate, router=params),
        GroupConfig(count=1, movement="stationary", waypoint=2 if far else 1, range=100, bitrate=bitrate,
                    router=params),
    ]
    traffic = TrafficConfig(interval_min=10, interval_max=10, size_min=size, size_max=size,
                            src_hosts=(0, 0), dst_hosts=(1, 1), stop=stop)
    return ScenarioConfig(duration=duration, map=map_path, groups=groups, traffic=traffic, collect=collect)


def dense_scenario(map_path: str, router: str = "epidemic", hosts: int = 8, duration: float = 1500,
                   buffer_size: int = 1_000_000, collect: bool = False, name: str = "dense",
                   **router_params) -> ScenarioConfig:
    """Hosts moviles rapidos sobre la grilla 3x3: muchos contactos"""
    group = GroupConfig(
        count=hosts, speed_min=5, speed_max=10, pause_min=0, pause_max=20, range=100,
        bitrate=250_000, buffer_size=buffer_size, router=RouterParams(name=router, **router_params),
    )
    traffic = TrafficConfig(interval_min=20, interval_max=30, size_min=10_000, size_max=50_000)
    return ScenarioConfig(name=name, duration=duration, map=map_path, ttl=600, groups=[group],
                          traffic=traffic, collect=collect)


def kinds(events) -> List[str]:
    return [e.kind.value for e in events]
