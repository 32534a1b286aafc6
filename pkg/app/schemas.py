# =====================================================
# SCHEMAS - Modelos Pydantic para Validacion
# =====================================================

from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

RouterName = Literal["epidemic", "snw", "maxprop", "mlmaxprop"]
MovementName = Literal["spmbm", "stationary"]
ROUTER_NAMES: Tuple[str, ...] = ("epidemic", "snw", "maxprop", "mlmaxprop")

# ==================== ESCENARIO ====================


class RouterParams(BaseModel):
    """Router de un grupo y sus parametros"""
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    name: RouterName = "maxprop"
    snw_copies: int = Field(8, ge=1)
    hop_threshold: int = Field(3, ge=0)
    ml_threshold: float = Field(0.5, ge=0.0, le=1.0)
    model_path: Optional[str] = None


class GroupConfig(BaseModel):
    """Grupo de hosts con movilidad, radio, buffer y router comunes"""
    model_config = ConfigDict(extra="forbid")

    label: str = ""
    count: int = Field(..., ge=1)
    movement: MovementName = "spmbm"
    waypoint: Optional[int] = Field(None, ge=0)
    speed_min: float = Field(0.5, ge=0)  # m/s
    speed_max: float = Field(1.5, ge=0)
    pause_min: float = Field(0.0, ge=0)  # s
    pause_max: float = Field(120.0, ge=0)
    range: float = Field(100.0, gt=0)  # m
    bitrate: float = Field(250_000, gt=0)  # bytes/s
    buffer_size: int = Field(5_000_000, gt=0)  # bytes
    router: RouterParams = Field(default_factory=RouterParams)

    @model_validator(mode="after")
    def check_ranges(self):
        if self.speed_min > self.speed_max:
            raise ValueError("speedMin debe ser <= speedMax")
        if self.pause_min > self.pause_max:
            raise ValueError("pauseMin debe ser <= pauseMax")
        if self.movement == "spmbm" and self.speed_min <= 0:
            raise ValueError("speedMin debe ser > 0 para movimiento spmbm")
        return self


class TrafficConfig(BaseModel):
    """Generador de mensajes: intervalo, tamano y rangos de hosts (inclusivos)"""
    model_config = ConfigDict(extra="forbid")

    interval_min: float = Field(25.0, gt=0)
    interval_max: float = Field(35.0, gt=0)
    size_min: int = Field(500_000, gt=0)
    size_max: int = Field(1_000_000, gt=0)
    src_hosts: Optional[Tuple[int, int]] = None
    dst_hosts: Optional[Tuple[int, int]] = None
    start: float = Field(0.0, ge=0)
    stop: Optional[float] = None

    @model_validator(mode="after")
    def check_ranges(self):
        if self.interval_min > self.interval_max:
            raise ValueError("intervalMin debe ser <= intervalMax")
        if self.size_min > self.size_max:
            raise ValueError("sizeMin debe ser <= sizeMax")
        for name, hosts in (("srcHosts", self.src_hosts), ("dstHosts", self.dst_hosts)):
            if hosts is not None and not 0 <= hosts[0] <= hosts[1]:
                raise ValueError(f"{name} debe ser un rango no vacio de ids >= 0")
        if self.stop is not None and self.stop < self.start:
            raise ValueError("stop debe ser >= start")
        return self


class ScenarioConfig(BaseModel):
    """Escenario completo de simulacion"""
    model_config = ConfigDict(extra="forbid")

    name: str = "default"
    duration: float = Field(..., gt=0)
    step: float = Field(1.0, gt=0)
    map: str
    ttl: float = Field(3600.0, gt=0)
    seed: int = Field(0, ge=0)
    collect: bool = False
    groups: List[GroupConfig] = Field(..., min_length=1)
    traffic: TrafficConfig

    @property
    def total_hosts(self) -> int:
        return sum(g.count for g in self.groups)

    @model_validator(mode="after")
    def check_scenario(self):
        total = self.total_hosts
        if total < 2:
            raise ValueError("Se necesitan al menos 2 hosts en total")
        for name, hosts in (("srcHosts", self.traffic.src_hosts), ("dstHosts", self.traffic.dst_hosts)):
            if hosts is not None and hosts[1] >= total:
                raise ValueError(f"Traffic.{name} referencia hosts inexistentes (total {total})")
        if not Path(self.map).is_file():
            raise ValueError(f"No existe el archivo de mapa: {self.map}")
        for group in self.groups:
            model_path = group.router.model_path
            if model_path and not Path(model_path).is_file():
                raise ValueError(f"No existe el archivo de modelo: {model_path}")
        return self


class SweepSpec(BaseModel):
    """Barrido: escenario base, ejes de parametros y semillas"""

    base: ScenarioConfig
    axes: Dict[str, List[str]]
    seeds: int = Field(10, ge=1)

    @field_validator("axes")
    @classmethod
    def check_axes(cls, axes):
        if not axes:
            raise ValueError("El barrido necesita al menos un eje")
        for name, values in axes.items():
            if not values:
                raise ValueError(f"El eje {name} no tiene valores")
        return axes


# ==================== APRENDIZAJE ====================


class GbdtParams(BaseModel):
    """Hiperparametros del boosting de arboles"""
    model_config = ConfigDict(extra="forbid")

    rounds: int = Field(100, ge=1)
    max_depth: int = Field(3, ge=1)
    learning_rate: float = Field(0.1, gt=0.0, le=1.0)
    l2_lambda: float = Field(1.0, ge=0.0)
    min_split_gain: float = Field(0.0, ge=0.0)
    min_leaf_examples: int = Field(5, ge=1)


class TrainReport(BaseModel):
    """Resultado de entrenamiento y evaluacion"""

    gains: Dict[str, float]
    total_gain: float = 0.0
    train_logloss: Optional[float] = None
    train_logloss_history: List[float] = Field(default_factory=list)
    test_logloss: Optional[float] = None
    test_auc: Optional[float] = None
    test_accuracy: Optional[float] = None
    confusion: Dict[str, int] = Field(default_factory=dict)
    roc: List[Tuple[float, float]] = Field(default_factory=list)
    n_train: int = 0
    n_test: int = 0


# ==================== REPORTES ====================


class MessageStatsReport(BaseModel):
    """Contadores y metricas de una corrida"""
    model_config = ConfigDict(from_attributes=True)

    scenario_id: str = "default"
    seed: int = Field(0, ge=0)
    router: str = ""
    created: int = 0
    started: int = 0
    relayed: int = 0
    aborted: int = 0
    dropped: int = 0
    removed: int = 0
    delivered: int = 0
    delivery_prob: float = 0.0
    overhead_ratio: Optional[float] = None
    latency_avg: Optional[float] = None
    latency_med: Optional[float] = None
    hopcount_avg: Optional[float] = None


class StatTestResult(BaseModel):
    """Resultado de una prueba pareada"""

    method: Literal["paired_t", "wilcoxon"]
    statistic: float
    p_value: float = Field(..., ge=0.0, le=1.0)
    n: int
    significant: bool


# ==================== API ====================


class RunRequest(BaseModel):
    """Esquema para lanzar una corrida por HTTP"""
    config: str = Field(..., min_length=1)
    seed: Optional[int] = None
    router: Optional[RouterName] = None


class RunResponse(MessageStatsReport):
    """Esquema de respuesta para una corrida registrada"""
    id: int
    event_log: Optional[str] = None
    created_at: datetime


class RouterInfo(BaseModel):
    """Router disponible y sus parametros por defecto"""
    name: str
    description: str
    defaults: Dict[str, Any]
