# =====================================================
# MOVILIDAD - Mapas WKT y Shortest Path Map-Based Movement
# =====================================================

import heapq
import math
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from shapely import wkt as shapely_wkt
from shapely.geometry import LineString

from app.exceptions import MapError

_COORDS_RE = re.compile(r"^\s*LINESTRING\s*(?:Z\s*)?\((?P<body>.*)\)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class Point:
    """Coordenada en metros"""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise MapError(f"Coordenada no finita: ({self.x}, {self.y})")

    def distance(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class MapGraph:
    """Grafo de calles: waypoints + aristas no dirigidas con longitud euclidiana"""

    def __init__(self, waypoints: Sequence[Point], edges: Iterable[Tuple[int, int]]):
        self.waypoints: List[Point] = list(waypoints)
        seen = set()
        for p in self.waypoints:
            key = (p.x, p.y)
            if key in seen:
                raise MapError(f"Waypoint duplicado en ({p.x}, {p.y})")
            seen.add(key)

        self.edges: List[Tuple[int, int, float]] = []
        self._adjacency: Dict[int, List[Tuple[int, float]]] = {i: [] for i in range(len(self.waypoints))}
        known = set()
        for a, b in edges:
            if a == b:
                raise MapError(f"Arista en lazo sobre el waypoint {a}")
            if not (0 <= a < len(self.waypoints) and 0 <= b < len(self.waypoints)):
                raise MapError(f"Arista ({a}, {b}) fuera de rango")
            key = (min(a, b), max(a, b))
            if key in known:
                continue
            known.add(key)
            length = self.waypoints[a].distance(self.waypoints[b])
            self.edges.append((key[0], key[1], length))
            self._adjacency[a].append((b, length))
            self._adjacency[b].append((a, length))
        for neighbours in self._adjacency.values():
            neighbours.sort()
        self._trees: Dict[int, Tuple[Dict[int, float], Dict[int, int]]] = {}

    def __len__(self) -> int:
        return len(self.waypoints)

    def neighbours(self, idx: int) -> List[Tuple[int, float]]:
        return self._adjacency[idx]

    def is_connected(self) -> bool:
        if not self.waypoints:
            return False
        visited = {0}
        queue = deque([0])
        while queue:
            current = queue.popleft()
            for nxt, _ in self._adjacency[current]:
                if nxt not in visited:
                    visited.add(nxt)
                    queue.append(nxt)
        return len(visited) == len(self.waypoints)

    def shortest_tree(self, target: int) -> Tuple[Dict[int, float], Dict[int, int]]:
        """Distancias hacia target y siguiente waypoint de cada nodo (cacheado, el grafo es inmutable)"""
        if target not in self._trees:
            self._trees[target] = _dijkstra(self, target)
        return self._trees[target]

    def __repr__(self):
        return f"<MapGraph(waypoints={len(self.waypoints)}, edges={len(self.edges)})>"


# ==================== LECTURA / ESCRITURA WKT ====================

def _parse_linestring(line: str, lineno: int) -> List[Tuple[float, float]]:
    match = _COORDS_RE.match(line)
    if not match:
        raise MapError(f"Linea {lineno}: se esperaba un LINESTRING: {line!r}")
    if "," not in match.group("body"):
        raise MapError(f"Linea {lineno}: LINESTRING con menos de 2 puntos")
    try:
        geometry = shapely_wkt.loads(line)
    except Exception as e:
        raise MapError(f"Linea {lineno}: WKT malformado ({e})") from e
    if not isinstance(geometry, LineString):
        raise MapError(f"Linea {lineno}: geometria {geometry.geom_type} no soportada")
    coords = [(float(c[0]), float(c[1])) for c in geometry.coords]
    if len(set(coords)) < 2:
        raise MapError(f"Linea {lineno}: LINESTRING con menos de 2 puntos distintos")
    return coords


def parse_wkt_map(text: Union[str, Iterable[str]]) -> MapGraph:
    """Construir el grafo a partir de LINESTRINGs WKT (uno por linea)"""
    lines = text.splitlines() if isinstance(text, str) else text
    index: Dict[Tuple[float, float], int] = {}
    waypoints: List[Point] = []
    edges: List[Tuple[int, int]] = []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        previous = None
        for coord in _parse_linestring(line, lineno):
            if coord not in index:
                index[coord] = len(waypoints)
                waypoints.append(Point(*coord))
            current = index[coord]
            # Vertices consecutivos repetidos no generan arista
            if previous is not None and previous != current:
                edges.append((previous, current))
            previous = current

    if not waypoints:
        raise MapError("El mapa no contiene LINESTRINGs")
    graph = MapGraph(waypoints, edges)
    if not graph.is_connected():
        raise MapError("El mapa esta desconectado: SPMBM requiere alcanzabilidad total")
    logger.debug(f"Mapa cargado: {len(graph.waypoints)} waypoints, {len(graph.edges)} aristas")
    return graph


def load_wkt_map(path: Union[str, Path]) -> MapGraph:
    """Leer un archivo WKT de mapa"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise MapError(f"No se pudo leer el mapa {path}: {e}") from e
    return parse_wkt_map(text)


def _fmt(value: float) -> str:
    return repr(float(value))


def serialize_wkt_map(graph: MapGraph) -> str:
    """Una arista por LINESTRING, en el orden de las aristas"""
    lines = []
    for a, b, _ in graph.edges:
        pa, pb = graph.waypoints[a], graph.waypoints[b]
        lines.append(f"LINESTRING ({_fmt(pa.x)} {_fmt(pa.y)}, {_fmt(pb.x)} {_fmt(pb.y)})")
    return "\n".join(lines) + "\n"


def grid_map(columns: int = 11, rows: int = 11, spacing: float = 100.0) -> MapGraph:
    """Mapa sintetico en reticula (por defecto 1 km x 1 km, 11x11 waypoints)"""
    if columns < 1 or rows < 1 or columns * rows < 2:
        raise MapError("La reticula necesita al menos 2 waypoints")
    if spacing <= 0:
        raise MapError("El espaciado de la reticula debe ser positivo")
    waypoints = [Point(c * spacing, r * spacing) for r in range(rows) for c in range(columns)]
    edges = []
    for r in range(rows):
        for c in range(columns):
            idx = r * columns + c
            if c + 1 < columns:
                edges.append((idx, idx + 1))
            if r + 1 < rows:
                edges.append((idx, idx + columns))
    return MapGraph(waypoints, edges)


# ==================== CAMINOS MINIMOS ====================

def _dijkstra(graph: MapGraph, target: int) -> Tuple[Dict[int, float], Dict[int, int]]:
    """Arbol de caminos minimos hacia target (el grafo es no dirigido)"""
    dist = {target: 0.0}
    next_hop: Dict[int, int] = {}
    done = set()
    queue = [(0.0, target)]
    while queue:
        d, current = heapq.heappop(queue)
        if current in done:
            continue
        done.add(current)
        for nxt, length in graph.neighbours(current):
            if nxt in done:
                continue
            relaxed = d + length
            best = dist.get(nxt)
            # Empates: gana el siguiente waypoint de menor indice
            if best is None or relaxed < best or (relaxed == best and current < next_hop[nxt]):
                dist[nxt] = relaxed
                next_hop[nxt] = current
                heapq.heappush(queue, (relaxed, nxt))
    return dist, next_hop


def shortest_path(graph: MapGraph, src: int, dst: int) -> List[int]:
    """Camino de longitud minima; en empates avanza al waypoint de menor indice"""
    n = len(graph)
    if not (0 <= src < n and 0 <= dst < n):
        raise MapError(f"Waypoint fuera de rango: {src} -> {dst}")
    if src == dst:
        return [src]
    dist, next_hop = graph.shortest_tree(dst)
    if src not in dist:
        raise MapError(f"Waypoint {dst} inalcanzable desde {src}")
    path = [src]
    while path[-1] != dst:
        path.append(next_hop[path[-1]])
    return path


def path_length(graph: MapGraph, path: Sequence[int]) -> float:
    return sum(graph.waypoints[a].distance(graph.waypoints[b]) for a, b in zip(path, path[1:]))


# ==================== SHORTEST PATH MAP-BASED MOVEMENT ====================

@dataclass
class MovementLeg:
    """Tramo de movimiento: recorrido, velocidad, salida y pausa al llegar

    `points` es la geometria del recorrido (un Point por waypoint de `path`);
    `MovementLeg.build` la toma del grafo.
    """
    from_wp: int
    to_wp: int
    path: List[int]
    speed: float
    depart_at: float
    pause_after: float
    points: Tuple[Point, ...] = field(repr=False)
    xs: np.ndarray = field(init=False, repr=False, compare=False)
    ys: np.ndarray = field(init=False, repr=False, compare=False)
    cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.path = list(self.path)
        self.points = tuple(self.points)
        if not self.path or len(self.points) != len(self.path):
            raise MapError("El tramo necesita un punto por cada waypoint del recorrido")
        if self.path[0] != self.from_wp or self.path[-1] != self.to_wp:
            raise MapError(f"El recorrido {self.path} no une {self.from_wp} con {self.to_wp}")
        if self.speed <= 0:
            raise MapError(f"Velocidad de tramo no positiva: {self.speed}")
        self.xs = np.array([p.x for p in self.points], dtype=float)
        self.ys = np.array([p.y for p in self.points], dtype=float)
        steps = np.hypot(np.diff(self.xs), np.diff(self.ys))
        self.cumulative = np.concatenate(([0.0], np.cumsum(steps)))

    @classmethod
    def build(cls, graph: MapGraph, path: Sequence[int], speed: float, depart_at: float = 0.0,
              pause_after: float = 0.0) -> "MovementLeg":
        """Tramo sobre `path` con la geometria de los waypoints del grafo"""
        path = list(path)
        if not path:
            raise MapError("Recorrido vacio")
        points = tuple(graph.waypoints[i] for i in path)
        return cls(path[0], path[-1], path, speed, depart_at, pause_after, points)

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    @property
    def arrive_at(self) -> float:
        return self.depart_at + self.length / self.speed

    @property
    def end_at(self) -> float:
        return self.arrive_at + self.pause_after


def plan_next_leg(
    graph: MapGraph,
    current_wp: int,
    rng: np.random.Generator,
    speed_range: Tuple[float, float],
    pause_range: Tuple[float, float],
    depart_at: float = 0.0,
) -> MovementLeg:
    """Elegir destino uniforme (distinto del actual) y recorrer el camino minimo"""
    n = len(graph)
    if n < 2:
        raise MapError("SPMBM necesita al menos 2 waypoints")
    k = int(rng.integers(0, n - 1))
    destination = k if k < current_wp else k + 1
    speed = float(rng.uniform(speed_range[0], speed_range[1]))
    pause = float(rng.uniform(pause_range[0], pause_range[1]))
    path = shortest_path(graph, current_wp, destination)
    return MovementLeg.build(graph, path, speed, depart_at, pause)


def position_at(leg: MovementLeg, t: float) -> Point:
    """Posicion sobre la polilinea del tramo en el instante t"""
    travelled = leg.speed * max(0.0, t - leg.depart_at)
    travelled = min(travelled, leg.length)
    return Point(float(np.interp(travelled, leg.cumulative, leg.xs)),
                 float(np.interp(travelled, leg.cumulative, leg.ys)))


class Mover:
    """Estado de movimiento de un host: encadena tramos SPMBM o permanece fijo"""

    def __init__(
        self,
        graph: MapGraph,
        rng: np.random.Generator,
        speed_range: Tuple[float, float],
        pause_range: Tuple[float, float],
        stationary: bool = False,
        start_wp: Optional[int] = None,
    ):
        self.graph = graph
        self.rng = rng
        self.speed_range = speed_range
        self.pause_range = pause_range
        self.stationary = stationary
        if start_wp is None:
            start_wp = int(rng.integers(0, len(graph)))
        elif not 0 <= start_wp < len(graph):
            raise MapError(f"Waypoint inicial {start_wp} fuera de rango")
        self.start_wp = start_wp
        self.leg: Optional[MovementLeg] = None
        if not stationary:
            self.leg = plan_next_leg(graph, start_wp, rng, speed_range, pause_range, depart_at=0.0)

    def position(self, t: float) -> Point:
        if self.leg is None:
            return self.graph.waypoints[self.start_wp]
        while t >= self.leg.end_at:
            self.leg = plan_next_leg(
                self.graph, self.leg.to_wp, self.rng, self.speed_range, self.pause_range,
                depart_at=self.leg.end_at,
            )
        return position_at(self.leg, t)
