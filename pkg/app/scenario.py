# =====================================================
# ESCENARIOS - Formato Section.key = value y barridos
# =====================================================

import itertools
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from loguru import logger
from pydantic import ValidationError

from app.config import settings
from app.exceptions import ConfigError
from app.schemas import ScenarioConfig, SweepSpec

Entries = Dict[str, str]

SCENARIO_KEYS = {
    "name": "name", "duration": "duration", "step": "step", "map": "map",
    "ttl": "ttl", "seed": "seed", "collect": "collect",
}
GROUP_KEYS = {
    "label": "label", "count": "count", "movement": "movement", "waypoint": "waypoint",
    "speedMin": "speed_min", "speedMax": "speed_max", "pauseMin": "pause_min",
    "pauseMax": "pause_max", "range": "range", "bitrate": "bitrate", "bufferSize": "buffer_size",
}
ROUTER_KEYS = {
    "router": "name", "snwCopies": "snw_copies", "hopThreshold": "hop_threshold",
    "mlThreshold": "ml_threshold", "modelPath": "model_path",
}
TRAFFIC_KEYS = {
    "intervalMin": "interval_min", "intervalMax": "interval_max", "sizeMin": "size_min",
    "sizeMax": "size_max", "srcHosts": "src_hosts", "dstHosts": "dst_hosts",
    "start": "start", "stop": "stop",
}
SIZE_KEYS = {"bufferSize", "bitrate", "sizeMin", "sizeMax"}
HOST_RANGE_KEYS = {"srcHosts", "dstHosts"}
PATH_KEYS = {"map", "modelPath"}

# Alias de ejes de barrido -> claves completas ("*" = todos los grupos)
SWEEP_ALIASES = {
    "nodeCount": ["Group1.count"],
    "range": ["Group*.range"],
    "bufferSize": ["Group*.bufferSize"],
    "bitrate": ["Group*.bitrate"],
    "ttl": ["Scenario.ttl"],
    "msgSize": ["Traffic.sizeMin", "Traffic.sizeMax"],
}

# Comentario: "#" al inicio o tras un espacio
_COMMENT_RE = re.compile(r"(?:^|\s)#.*$")
_GROUP_RE = re.compile(r"^Group(?P<index>[1-9]\d*)$")
_SIZE_RE = re.compile(r"^(?P<number>[+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(?P<unit>[kMG]?)$")
_UNITS = {"": 1, "k": 1_000, "M": 1_000_000, "G": 1_000_000_000}


# ==================== LECTURA ====================


def read_entries(text: str) -> Entries:
    """Pares clave/valor en orden; '#' al inicio o tras un espacio inicia un comentario"""
    entries: Entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _COMMENT_RE.sub("", raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"Linea {lineno}: se esperaba 'Seccion.clave = valor'")
        if key in entries:
            raise ConfigError(f"Linea {lineno}: clave repetida {key}")
        entries[key] = value
    return entries


def parse_size(value: str) -> Union[int, float]:
    """'5M' -> 5000000 (sufijos k, M, G en base 1000)"""
    match = _SIZE_RE.match(value.strip())
    if not match:
        raise ValueError(f"tamano invalido: {value!r}")
    number = float(match["number"]) * _UNITS[match["unit"]]
    return int(number) if number.is_integer() else number


def _parse_hosts(value: str) -> Tuple[int, int]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2:
        raise ValueError(f"se esperaba 'desde,hasta': {value!r}")
    return int(parts[0]), int(parts[1])


def _convert(name: str, value: str, base_dir: Optional[Path]):
    if name in SIZE_KEYS:
        return parse_size(value)
    if name in HOST_RANGE_KEYS:
        return _parse_hosts(value)
    if name in PATH_KEYS and base_dir is not None:
        return str(base_dir / value)
    return value


def _reverse(table: Dict[str, str], field) -> str:
    return next((k for k, v in table.items() if v == field), str(field))


def _key_for_loc(loc: tuple) -> str:
    """Ruta de error de pydantic -> clave del archivo"""
    if not loc:
        return "Scenario"
    if loc[0] == "groups" and len(loc) >= 2:
        section = f"Group{loc[1] + 1}"
        if len(loc) >= 4 and loc[2] == "router":
            return f"{section}.{_reverse(ROUTER_KEYS, loc[3])}"
        if len(loc) >= 3:
            return f"{section}.{_reverse(GROUP_KEYS, loc[2])}"
        return section
    if loc[0] == "traffic":
        return f"Traffic.{_reverse(TRAFFIC_KEYS, loc[1])}" if len(loc) >= 2 else "Traffic"
    return f"Scenario.{_reverse(SCENARIO_KEYS, loc[0])}"


def config_from_entries(entries: Entries, base_dir: Optional[Path] = None) -> ScenarioConfig:
    """Validar las entradas y construir el escenario"""
    scenario: dict = {}
    groups: Dict[int, dict] = {}
    traffic: dict = {}
    for key, value in entries.items():
        section, _, name = key.partition(".")
        group = _GROUP_RE.match(section)
        if section == "Scenario" and name in SCENARIO_KEYS:
            target, field = scenario, SCENARIO_KEYS[name]
        elif group and name in GROUP_KEYS:
            target, field = groups.setdefault(int(group["index"]), {}), GROUP_KEYS[name]
        elif group and name in ROUTER_KEYS:
            target = groups.setdefault(int(group["index"]), {}).setdefault("router", {})
            field = ROUTER_KEYS[name]
        elif section == "Traffic" and name in TRAFFIC_KEYS:
            target, field = traffic, TRAFFIC_KEYS[name]
        else:
            raise ConfigError(f"Clave desconocida: {key}")
        try:
            target[field] = _convert(name, value, base_dir)
        except ValueError as e:
            raise ConfigError(f"{key}: {e}") from e

    for required in ("duration", "map"):
        if required not in scenario:
            raise ConfigError(f"Falta la clave obligatoria Scenario.{required}")
    if not groups:
        raise ConfigError("Se necesita al menos un grupo (Group1.count)")
    if sorted(groups) != list(range(1, len(groups) + 1)):
        raise ConfigError(f"Los grupos deben numerarse desde 1 sin huecos: {sorted(groups)}")
    if not traffic:
        raise ConfigError("Falta la seccion Traffic")

    data = dict(scenario, groups=[groups[i] for i in sorted(groups)], traffic=traffic)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(f"{_key_for_loc(first['loc'])}: {first['msg']}") from e


def parse_config(text: str, base_dir: Optional[Union[str, Path]] = None) -> ScenarioConfig:
    """Texto Section.key = value -> ScenarioConfig validado"""
    return config_from_entries(read_entries(text), Path(base_dir) if base_dir is not None else None)


def load_entries(path: Union[str, Path]) -> Tuple[Entries, Path]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"No se pudo leer la configuracion {path}: {e}") from e
    return read_entries(text), path.resolve().parent


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    entries, base_dir = load_entries(path)
    return config_from_entries(entries, base_dir)


# ==================== SERIALIZACION ====================


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return f"{value[0]},{value[1]}"
    return str(value)


def serialize_config(cfg: ScenarioConfig) -> str:
    """Escenario -> texto; parse_config(serialize_config(c)) == c"""
    lines = []
    for key, field in SCENARIO_KEYS.items():
        lines.append(f"Scenario.{key} = {_fmt(getattr(cfg, field))}")
    for index, group in enumerate(cfg.groups, start=1):
        for key, field in GROUP_KEYS.items():
            value = getattr(group, field)
            if value is not None and value != "":
                lines.append(f"Group{index}.{key} = {_fmt(value)}")
        for key, field in ROUTER_KEYS.items():
            value = getattr(group.router, field)
            if value is not None:
                lines.append(f"Group{index}.{key} = {_fmt(value)}")
    for key, field in TRAFFIC_KEYS.items():
        value = getattr(cfg.traffic, field)
        if value is not None:
            lines.append(f"Traffic.{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


# ==================== BARRIDOS ====================


def _group_indices(entries: Entries) -> List[int]:
    indices = set()
    for key in entries:
        match = _GROUP_RE.match(key.partition(".")[0])
        if match:
            indices.add(int(match["index"]))
    return sorted(indices)


def axis_keys(axis: str, entries: Entries) -> List[str]:
    """Claves completas que modifica un eje (alias o clave literal)"""
    keys = []
    for key in SWEEP_ALIASES.get(axis, [axis]):
        if key.startswith("Group*."):
            keys.extend(f"Group{i}.{key.partition('.')[2]}" for i in _group_indices(entries))
        else:
            keys.append(key)
    if not keys or any("." not in k for k in keys):
        raise ConfigError(f"Eje de barrido desconocido: {axis}")
    return keys


def apply_override(entries: Entries, axis: str, value: str) -> Entries:
    updated = dict(entries)
    for key in axis_keys(axis, entries):
        updated[key] = value
    return updated


def expand_sweep(entries: Entries, base_dir: Optional[Path], axes: Dict[str, List[str]],
                 seeds: int = 10, cap: Optional[int] = None) -> List[Tuple[Dict[str, str], ScenarioConfig]]:
    """Producto cartesiano de ejes; una configuracion validada por celda"""
    base = config_from_entries(entries, base_dir)
    try:
        spec = SweepSpec(base=base, axes=axes, seeds=seeds)
    except ValidationError as e:
        raise ConfigError(f"Barrido invalido: {e.errors()[0]['msg']}") from e

    cap = settings.sweep_cap if cap is None else cap
    cells = 1
    for values in spec.axes.values():
        cells *= len(values)
    if cells * spec.seeds > cap:
        raise ConfigError(f"El barrido excede el limite: {cells} celdas x {spec.seeds} semillas > {cap}")

    names = list(spec.axes)
    grid = []
    for combo in itertools.product(*(spec.axes[n] for n in names)):
        assignment = dict(zip(names, combo))
        cell_entries = dict(entries)
        for axis, value in assignment.items():
            cell_entries = apply_override(cell_entries, axis, value)
        label = ";".join([base.name] + [f"{k}={v}" for k, v in assignment.items()])
        cell_entries["Scenario.name"] = label
        grid.append((assignment, config_from_entries(cell_entries, base_dir)))
    logger.info(f"Barrido: {cells} celdas x {spec.seeds} semillas")
    return grid
