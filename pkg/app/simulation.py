# =====================================================
# SIMULACION - Motor determinista por pasos de tiempo
# =====================================================
# Cada paso, en orden fijo: trafico, movimiento, conectividad,
# progreso de transferencias y expiracion por TTL.

import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Set, Tuple

import numpy as np
from loguru import logger

from app.eventlog import EventKind, EventLog, EventRecord
from app.features import RelayFeatureVector, extract_features
from app.gbdt import GbdtModel, load_model_cached
from app.messaging import Buffer, Message, TrafficGenerator, buffer_insert, expire_ttl
from app.mobility import MapGraph, Mover, Point, load_wkt_map
from app.routing import Router, create_router
from app.schemas import ScenarioConfig

# Etiquetas de los streams aleatorios derivados de la semilla
MOBILITY_STREAM = 1
TRAFFIC_STREAM = 2

Pair = Tuple[int, int]


@dataclass
class Host:
    id: int
    group: str
    range: float  # m
    bitrate: float  # bytes/s
    buffer: Buffer
    mover: Mover
    position: Point
    router: Optional[Router] = None

    def __repr__(self):
        return f"<Host(id={self.id}, group={self.group!r})>"


@dataclass
class TransferState:
    """Transferencia en curso sender -> receiver"""
    msg_id: str
    sender: int
    receiver: int
    size: int
    bytes_remaining: float
    hop_count: int
    features: Optional[RelayFeatureVector] = None


@dataclass
class Connection:
    """Enlace activo entre a < b; una transferencia por sentido"""
    a: int
    b: int
    up_since: float
    transfers: Dict[int, Optional[TransferState]] = field(default_factory=dict)

    @property
    def pair(self) -> Pair:
        return self.a, self.b

    def active_transfers(self) -> List[TransferState]:
        return [self.transfers[s] for s in sorted(self.transfers) if self.transfers[s] is not None]


class ContactHistory:
    """Instantes de fin de cada contacto completado, por par no ordenado"""

    def __init__(self):
        self._ends: Dict[Pair, List[float]] = defaultdict(list)

    @staticmethod
    def _key(x: int, y: int) -> Pair:
        return (x, y) if x < y else (y, x)

    def record(self, x: int, y: int, ended_at: float) -> None:
        self._ends[self._key(x, y)].append(ended_at)

    def completed(self, x: int, y: int, until: float) -> int:
        """Contactos entre x e y terminados en [0, until]"""
        ends = self._ends.get(self._key(x, y))
        return bisect_right(ends, until) if ends else 0


def connected(a: Host, b: Host) -> bool:
    """Alcance simetrico: distancia <= min(rango_a, rango_b)"""
    return a.position.distance(b.position) <= min(a.range, b.range)


# ==================== MUNDO ====================


class World:
    """Hosts, enlaces, transferencias y log de eventos de una corrida"""

    def __init__(self, config: ScenarioConfig, seed: int, graph: MapGraph,
                 models: Optional[Mapping[str, GbdtModel]] = None):
        self.config = config
        self.seed = seed
        self.graph = graph
        self.now = 0.0
        self.events: EventLog = []
        self.connections: Dict[Pair, Connection] = {}
        self.contacts = ContactHistory()
        self.incoming: Dict[int, Set[str]] = defaultdict(set)
        self.delivered_ids: Set[str] = set()
        # Hosts con mensajes nuevos en el buffer desde el ultimo progreso
        self.fresh: Set[int] = set()
        self._models: Dict[str, GbdtModel] = dict(models or {})
        self._warned_no_model = False

        self.hosts: List[Host] = []
        for group_index, group in enumerate(config.groups, start=1):
            label = group.label or f"Group{group_index}"
            for _ in range(group.count):
                host_id = len(self.hosts)
                mover = Mover(
                    graph,
                    np.random.default_rng([seed, MOBILITY_STREAM, host_id]),
                    (group.speed_min, group.speed_max),
                    (group.pause_min, group.pause_max),
                    stationary=group.movement == "stationary",
                    start_wp=group.waypoint,
                )
                self.hosts.append(Host(
                    id=host_id, group=label, range=group.range, bitrate=group.bitrate,
                    buffer=Buffer(group.buffer_size), mover=mover, position=mover.position(0.0),
                ))
        # Routers al final: pueden consultar el mundo al construirse
        host_iter = iter(self.hosts)
        for group in config.groups:
            for _ in range(group.count):
                host = next(host_iter)
                host.router = create_router(group.router, host, self)

        self.traffic = TrafficGenerator(
            config.traffic,
            np.random.default_rng([seed, TRAFFIC_STREAM]),
            ttl=config.ttl,
            total_hosts=len(self.hosts),
            stop=config.duration,
        )
        self._ranges = np.array([h.range for h in self.hosts], dtype=float)
        self._limit = np.minimum.outer(self._ranges, self._ranges)

    # ==================== MODELOS ====================

    def model_for(self, path: Optional[str]) -> Optional[GbdtModel]:
        """Modelo compartido por ruta; None activa el respaldo MaxProp"""
        if not path:
            if not self._warned_no_model:
                logger.warning("mlmaxprop sin modelo: la compuerta deja pasar todo (respaldo MaxProp)")
                self._warned_no_model = True
            return None
        if path not in self._models:
            self._models[path] = load_model_cached(path)
        return self._models[path]

    # ==================== EVENTOS Y BUFFERS ====================

    def emit(self, kind: EventKind, msg_id: Optional[str] = None, src: Optional[int] = None,
             dst: Optional[int] = None, size: Optional[int] = None, hop_count: Optional[int] = None,
             reason: Optional[str] = None, features: Optional[RelayFeatureVector] = None) -> EventRecord:
        event = EventRecord(self.now, kind, msg_id, src, dst, size, hop_count, reason, features)
        self.events.append(event)
        return event

    def store(self, host: Host, msg: Message) -> bool:
        """Guardar en el buffer del host desalojando segun su router"""
        result = buffer_insert(host.buffer, msg, host.router.drop_order)
        for victim in result.dropped:
            self.emit(EventKind.DROPPED, victim.id, host.id, None, victim.size, victim.hop_count, "buffer_full")
            host.router.on_message_gone(victim.id)
        if result.accepted:
            self.fresh.add(host.id)
        else:
            self.emit(EventKind.DROPPED, msg.id, host.id, None, msg.size, msg.hop_count, result.reason)
        return result.accepted

    def remove_message(self, host: Host, msg_id: str, reason: str) -> None:
        msg = host.buffer.remove(msg_id)
        self.emit(EventKind.REMOVED, msg.id, host.id, None, msg.size, msg.hop_count, reason)
        host.router.on_message_gone(msg_id)

    # ==================== FASES DEL PASO ====================

    def step(self, now: float, dt: Optional[float] = None) -> None:
        self.now = now
        self._generate_traffic()
        self._move()
        self._update_connectivity()
        progress_transfers(self, self.config.step if dt is None else dt)
        self._expire()

    def _generate_traffic(self) -> None:
        for msg in self.traffic.generate_traffic(self.now):
            source = self.hosts[msg.src]
            self.emit(EventKind.CREATED, msg.id, msg.src, msg.dst, msg.size, msg.hop_count)
            if self.store(source, msg):
                source.router.on_created(msg)

    def _move(self) -> None:
        for host in self.hosts:
            host.position = host.mover.position(self.now)

    def _links(self) -> Set[Pair]:
        xs = np.array([h.position.x for h in self.hosts])
        ys = np.array([h.position.y for h in self.hosts])
        distance = np.hypot(np.subtract.outer(xs, xs), np.subtract.outer(ys, ys))
        a, b = np.nonzero(np.triu(distance <= self._limit, k=1))
        return set(zip(a.tolist(), b.tolist()))

    def _update_connectivity(self) -> None:
        links = self._links()
        for pair in sorted(set(self.connections) - links):
            self._contact_down(self.connections.pop(pair))
        for pair in sorted(links - set(self.connections)):
            self._contact_up(pair)

    def _contact_down(self, conn: Connection) -> None:
        for transfer in conn.active_transfers():
            self.incoming[transfer.receiver].discard(transfer.msg_id)
            self.emit(EventKind.ABORTED, transfer.msg_id, transfer.sender, transfer.receiver,
                      transfer.size, transfer.hop_count, "link_down")
        self.emit(EventKind.CONTACT_DOWN, src=conn.a, dst=conn.b)
        self.contacts.record(conn.a, conn.b, self.now)
        a, b = self.hosts[conn.a], self.hosts[conn.b]
        a.router.on_contact_down(b)
        b.router.on_contact_down(a)

    def _contact_up(self, pair: Pair) -> None:
        conn = Connection(pair[0], pair[1], up_since=self.now)
        self.connections[pair] = conn
        self.emit(EventKind.CONTACT_UP, src=conn.a, dst=conn.b)
        a, b = self.hosts[conn.a], self.hosts[conn.b]
        a.router.on_contact_up(b)
        b.router.on_contact_up(a)
        a.router.exchange_metadata(b.router)
        try_start(self, conn, a, b)
        try_start(self, conn, b, a)

    def _expire(self) -> None:
        for host in self.hosts:
            for msg in expire_ttl(host.buffer, self.now):
                self.emit(EventKind.REMOVED, msg.id, host.id, None, msg.size, msg.hop_count, "ttl")
                host.router.on_message_gone(msg.id)


# ==================== TRANSFERENCIAS ====================


def try_start(world: World, conn: Connection, sender: Host, receiver: Host) -> Optional[TransferState]:
    """Iniciar la primera oferta del router que el receptor no este recibiendo ya"""
    if conn.transfers.get(sender.id) is not None:
        return None
    busy = world.incoming[receiver.id]
    for msg in sender.router.offer_list(receiver):
        if msg.id in busy:
            continue
        features = None
        if world.config.collect:
            features = extract_features(msg, sender, receiver, world.now, world.contacts)
        transfer = TransferState(msg.id, sender.id, receiver.id, msg.size, float(msg.size),
                                 msg.hop_count, features)
        conn.transfers[sender.id] = transfer
        busy.add(msg.id)
        world.emit(EventKind.STARTED, msg.id, sender.id, receiver.id, msg.size, msg.hop_count)
        return transfer
    return None


def _abort(world: World, transfer: TransferState, reason: str) -> None:
    world.emit(EventKind.ABORTED, transfer.msg_id, transfer.sender, transfer.receiver,
               transfer.size, transfer.hop_count, reason)


def _complete(world: World, transfer: TransferState) -> None:
    sender, receiver = world.hosts[transfer.sender], world.hosts[transfer.receiver]
    world.incoming[receiver.id].discard(transfer.msg_id)
    msg = sender.buffer.get(transfer.msg_id)
    if msg is None:
        _abort(world, transfer, "sender_lost")
        return
    is_destination = receiver.id == msg.dst
    if not is_destination and not receiver.router.accepts(msg):
        _abort(world, transfer, "refused")
        return
    if not sender.router.can_complete(msg, receiver):
        _abort(world, transfer, "quota")
        return

    copy = msg.copy_for(receiver.id)
    world.emit(EventKind.RELAYED, msg.id, sender.id, receiver.id, msg.size, copy.hop_count,
               features=transfer.features)
    handoff = sender.router.on_transfer_done(msg, receiver)
    if is_destination:
        if msg.id not in world.delivered_ids:
            world.delivered_ids.add(msg.id)
            world.emit(EventKind.DELIVERED, msg.id, sender.id, receiver.id, msg.size, copy.hop_count)
        receiver.router.on_delivered(copy)
    else:
        receiver.router.on_received(copy, sender, handoff)


def progress_transfers(world: World, dt: float) -> List[EventRecord]:
    """Avanzar cada sentido de cada enlace bitrate*dt bytes; devuelve los eventos emitidos"""
    first = len(world.events)
    # Un sentido ocioso solo se reofrece si el emisor recibio mensajes nuevos
    fresh, world.fresh = world.fresh, set()
    for pair in sorted(world.connections):
        conn = world.connections[pair]
        for sender_id, receiver_id in ((conn.a, conn.b), (conn.b, conn.a)):
            sender, receiver = world.hosts[sender_id], world.hosts[receiver_id]
            transfer = conn.transfers.get(sender_id)
            if transfer is None and sender_id in fresh:
                transfer = try_start(world, conn, sender, receiver)
            if transfer is None:
                continue
            transfer.bytes_remaining -= sender.bitrate * dt
            if transfer.bytes_remaining <= 0:
                conn.transfers[sender_id] = None
                _complete(world, transfer)
                try_start(world, conn, sender, receiver)
    return world.events[first:]


# ==================== CORRIDA ====================

# Tolerancia para duraciones multiplo del paso con error de redondeo
_STEP_EPS = 1e-9


def step_times(duration: float, step: float) -> List[Tuple[float, float]]:
    """(instante, dt) de cada paso; el ultimo termina exactamente en duration"""
    steps = max(1, math.ceil(duration / step - _STEP_EPS))
    schedule = [(k * step, step) for k in range(1, steps)]
    last = duration - (steps - 1) * step
    schedule.append((float(duration), step if abs(last - step) <= _STEP_EPS else last))
    return schedule


def run_simulation(config: ScenarioConfig, seed: Optional[int] = None, graph: Optional[MapGraph] = None,
                   models: Optional[Mapping[str, GbdtModel]] = None) -> EventLog:
    """Corrida completa: (config, seed) -> log de eventos"""
    seed = config.seed if seed is None else seed
    graph = graph if graph is not None else load_wkt_map(config.map)
    world = World(config, seed, graph, models)
    routers = sorted({g.router.name for g in config.groups})
    logger.info(
        f"Corrida {config.name}: routers={','.join(routers)} seed={seed} "
        f"hosts={len(world.hosts)} duracion={config.duration}s"
    )
    for now, dt in step_times(config.duration, config.step):
        world.step(now, dt)

    counts: Dict[str, int] = defaultdict(int)
    for event in world.events:
        counts[event.kind.value] += 1
    logger.info(
        f"Corrida {config.name} seed={seed} terminada: creados={counts['created']} "
        f"relevados={counts['relayed']} entregados={counts['delivered']}"
    )
    return world.events
