# =====================================================
# MENSAJERIA - Mensajes, buffers, trafico y TTL
# =====================================================

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.exceptions import DuplicateMessageError, TrafficError
from app.schemas import TrafficConfig


@dataclass
class Message:
    """Copia local de un mensaje store-carry-forward"""
    id: str
    seq: int
    src: int
    dst: int
    size: int
    created_at: float
    ttl: float
    hop_count: int = 0
    path: List[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.path:
            self.path = [self.src]

    def copy_for(self, receiver: int) -> "Message":
        """Copia que recibe el siguiente host (un salto mas)"""
        return Message(
            id=self.id, seq=self.seq, src=self.src, dst=self.dst, size=self.size,
            created_at=self.created_at, ttl=self.ttl,
            hop_count=self.hop_count + 1, path=self.path + [receiver],
        )

    def age(self, now: float) -> float:
        return now - self.created_at

    def expired(self, now: float) -> bool:
        return now - self.created_at > self.ttl


class Buffer:
    """Buffer de un host: capacidad en bytes, entradas en orden de insercion"""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.used = 0
        self.version = 0
        self._entries: "OrderedDict[str, Message]" = OrderedDict()

    def __contains__(self, msg_id: str) -> bool:
        return msg_id in self._entries

    def __iter__(self) -> Iterator[Message]:
        return iter(list(self._entries.values()))

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, msg_id: str) -> Optional[Message]:
        return self._entries.get(msg_id)

    def ids(self) -> set:
        return set(self._entries)

    @property
    def free(self) -> int:
        return self.capacity - self.used

    @property
    def occupancy(self) -> float:
        return self.used / self.capacity

    def add(self, msg: Message) -> None:
        if msg.id in self._entries:
            raise DuplicateMessageError(f"El mensaje {msg.id} ya esta en el buffer")
        self._entries[msg.id] = msg
        self.used += msg.size
        self.version += 1

    def remove(self, msg_id: str) -> Message:
        msg = self._entries.pop(msg_id)
        self.used -= msg.size
        self.version += 1
        return msg


DropOrder = Union[Sequence[Message], Callable[[Buffer], Sequence[Message]]]


@dataclass
class InsertResult:
    accepted: bool
    dropped: List[Message] = field(default_factory=list)
    reason: Optional[str] = None


def buffer_insert(buffer: Buffer, msg: Message, drop_order: DropOrder) -> InsertResult:
    """Insertar desalojando segun el orden del router hasta que el mensaje quepa"""
    if msg.id in buffer:
        raise DuplicateMessageError(f"El mensaje {msg.id} ya esta en el buffer")
    if msg.size > buffer.capacity:
        return InsertResult(accepted=False, reason="too_big")

    dropped = []
    if msg.size > buffer.free:
        order = drop_order(buffer) if callable(drop_order) else drop_order
        for victim in order:
            if msg.size <= buffer.free:
                break
            if victim.id in buffer:
                dropped.append(buffer.remove(victim.id))
    buffer.add(msg)
    return InsertResult(accepted=True, dropped=dropped)


def expire_ttl(buffer: Buffer, now: float) -> List[Message]:
    """Eliminar los mensajes con now - created_at > ttl"""
    expired = [m for m in buffer if m.expired(now)]
    for msg in expired:
        buffer.remove(msg.id)
    return expired


# ==================== GENERACION DE TRAFICO ====================


class TrafficGenerator:
    """Generador de mensajes con intervalo, tamano y extremos uniformes"""

    def __init__(self, cfg: TrafficConfig, rng: np.random.Generator, ttl: float,
                 total_hosts: int, stop: Optional[float] = None):
        self.cfg = cfg
        self.rng = rng
        self.ttl = ttl
        self.src_hosts: Tuple[int, int] = cfg.src_hosts or (0, total_hosts - 1)
        self.dst_hosts: Tuple[int, int] = cfg.dst_hosts or (0, total_hosts - 1)
        if (self.src_hosts[0] == self.src_hosts[1] and self.dst_hosts == self.src_hosts):
            raise TrafficError(
                f"Sin pares validos: origen y destino solo contienen el host {self.src_hosts[0]}"
            )
        self.stop = cfg.stop if cfg.stop is not None else stop
        self.next_time = cfg.start + self._interval()
        self._seq = 0

    def _interval(self) -> float:
        return float(self.rng.uniform(self.cfg.interval_min, self.cfg.interval_max))

    def _draw(self, hosts: Tuple[int, int]) -> int:
        return int(self.rng.integers(hosts[0], hosts[1] + 1))

    def _pick_pair(self) -> Tuple[int, int]:
        src = self._draw(self.src_hosts)
        single_dst = self.dst_hosts[0] == self.dst_hosts[1]
        while single_dst and src == self.dst_hosts[0]:
            src = self._draw(self.src_hosts)
        dst = self._draw(self.dst_hosts)
        while dst == src:
            dst = self._draw(self.dst_hosts)
        return src, dst

    def generate_traffic(self, now: float) -> List[Message]:
        """Mensajes cuyo instante de creacion ya llego (created_at = now)"""
        created = []
        while self.next_time <= now and (self.stop is None or self.next_time <= self.stop):
            src, dst = self._pick_pair()
            size = int(self.rng.integers(self.cfg.size_min, self.cfg.size_max + 1))
            self._seq += 1
            created.append(Message(
                id=f"M{self._seq}", seq=self._seq, src=src, dst=dst,
                size=size, created_at=now, ttl=self.ttl,
            ))
            self.next_time += self._interval()
        return created
