# =====================================================
# ROUTING - MaxProp
# =====================================================
# Tablas de probabilidad de encuentro renormalizadas, costo de camino
# sum(1 - f) por Dijkstra, cola por saltos/costo y acks de entrega.

import heapq
import math
from typing import Dict, Iterable, List, Mapping, Set, Tuple

from app.messaging import Buffer, Message
from app.routing.base import Router, SummaryVector, destination_first

DeliveryLikelihoodTable = Dict[int, float]
LikelihoodSnapshot = Dict[int, Mapping[int, float]]


def maxprop_update_likelihood(table: DeliveryLikelihoodTable, met_peer: int) -> DeliveryLikelihoodTable:
    """Sumar 1 al peer encontrado y renormalizar para que sum(f) = 1"""
    table[met_peer] = table.get(met_peer, 0.0) + 1.0
    total = sum(table.values())
    for peer in table:
        table[peer] /= total
    return table


def _nodes(snapshot: LikelihoodSnapshot) -> List[int]:
    nodes = set(snapshot)
    for table in snapshot.values():
        nodes.update(table)
    return sorted(nodes)


def path_costs(snapshot: LikelihoodSnapshot, src: int) -> Dict[int, float]:
    """Costo minimo desde src a todo host conocido; aristas solo desde hosts con tabla"""
    nodes = _nodes(snapshot)
    cost = {src: 0.0}
    done: Set[int] = set()
    queue = [(0.0, src)]
    while queue:
        c, current = heapq.heappop(queue)
        if current in done:
            continue
        done.add(current)
        table = snapshot.get(current)
        if table is None:
            continue
        for nxt in nodes:
            if nxt == current or nxt in done:
                continue
            # Entradas ausentes pesan 1
            relaxed = c + (1.0 - table.get(nxt, 0.0))
            if relaxed < cost.get(nxt, math.inf):
                cost[nxt] = relaxed
                heapq.heappush(queue, (relaxed, nxt))
    return cost


def maxprop_path_cost(snapshot: LikelihoodSnapshot, src: int, dst: int) -> float:
    """Costo de entrega src -> dst, +inf si dst no aparece en el snapshot"""
    return path_costs(snapshot, src).get(dst, math.inf)


def maxprop_order_queue(buffer: Iterable[Message], costs: Mapping[int, float],
                        hop_threshold: int) -> Tuple[List[Message], List[Message]]:
    """(orden de transmision, orden de descarte)"""
    messages = list(buffer)
    low = sorted((m for m in messages if m.hop_count < hop_threshold),
                 key=lambda m: (m.hop_count, m.created_at, m.seq))
    high = sorted((m for m in messages if m.hop_count >= hop_threshold),
                  key=lambda m: (costs.get(m.dst, math.inf), m.seq))
    transmit = low + high
    return transmit, transmit[::-1]


def ack_exchange(own_acks: Set[str], peer_acks: Set[str], buffer: Buffer) -> Tuple[Set[str], List[str]]:
    """Union de acks y mensajes del buffer que deben borrarse"""
    merged = own_acks | peer_acks
    return merged, [m.id for m in buffer if m.id in merged]


class MaxPropRouter(Router):
    name = "maxprop"
    description = "MaxProp: historial de encuentros, umbral de saltos y acks"

    def __init__(self, params, host, world):
        super().__init__(params, host, world)
        self.table: DeliveryLikelihoodTable = {}
        self.snapshot: Dict[int, Mapping[int, float]] = {host.id: self.table}
        self.acks: Set[str] = set()
        self._version = 0
        self._costs_cache: Tuple[int, Dict[int, float]] = (-1, {})
        self._queue_cache: Tuple[Tuple[int, int], Tuple[List[Message], List[Message]]] = ((-1, -1), ([], []))

    # ==================== RESUMENES ====================

    def summary(self) -> SummaryVector:
        return SummaryVector(self.host.buffer, self.delivered, self.acks)

    def accepts(self, msg: Message) -> bool:
        return super().accepts(msg) and msg.id not in self.acks

    # ==================== CONTACTOS ====================

    def on_contact_up(self, peer) -> None:
        maxprop_update_likelihood(self.table, peer.id)
        self._version += 1

    def export_snapshot(self) -> Dict[int, Mapping[int, float]]:
        exported = dict(self.snapshot)
        exported[self.host.id] = dict(self.table)
        return exported

    def merge_snapshot(self, received: Mapping[int, Mapping[int, float]]) -> None:
        # Ultimo en llegar gana; la tabla propia no se reemplaza
        for owner, table in received.items():
            if owner != self.host.id:
                self.snapshot[owner] = table
        self._version += 1

    def exchange_metadata(self, peer: Router) -> None:
        if isinstance(peer, MaxPropRouter):
            merged, own_stale = ack_exchange(self.acks, peer.acks, self.host.buffer)
            _, peer_stale = ack_exchange(peer.acks, self.acks, peer.host.buffer)
            self.acks = set(merged)
            peer.acks = set(merged)
            for msg_id in own_stale:
                self.world.remove_message(self.host, msg_id, "ack")
            for msg_id in peer_stale:
                self.world.remove_message(peer.host, msg_id, "ack")

            mine, theirs = self.export_snapshot(), peer.export_snapshot()
            self.merge_snapshot(theirs)
            peer.merge_snapshot(mine)

    # ==================== COLA ====================

    def costs(self) -> Dict[int, float]:
        version, cached = self._costs_cache
        if version != self._version:
            cached = path_costs(self.snapshot, self.host.id)
            self._costs_cache = (self._version, cached)
        return cached

    def ordered_queue(self) -> Tuple[List[Message], List[Message]]:
        key = (self._version, self.host.buffer.version)
        if self._queue_cache[0] != key:
            self._queue_cache = (key, maxprop_order_queue(self.host.buffer, self.costs(),
                                                          self.params.hop_threshold))
        return self._queue_cache[1]

    def offer_list(self, peer) -> List[Message]:
        summary = peer.router.summary()
        transmit, _ = self.ordered_queue()
        return destination_first([m for m in transmit if m.id not in summary], peer.id)

    def drop_order(self, buffer: Buffer) -> List[Message]:
        _, drop = maxprop_order_queue(buffer, self.costs(), self.params.hop_threshold)
        return drop

    def on_delivered(self, msg: Message) -> None:
        super().on_delivered(msg)
        self.acks.add(msg.id)
