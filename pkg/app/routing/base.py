# =====================================================
# ROUTING - Contrato comun de los routers
# =====================================================

from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Set

from app.messaging import Buffer, Message
from app.schemas import RouterParams

if TYPE_CHECKING:
    from app.simulation import Host, World


class SummaryVector:
    """Ids que un host ya conoce: buffer, entregados a el y (si aplica) acks"""

    def __init__(self, buffer: Buffer, *known: Set[str]):
        self._buffer = buffer
        self._known = known

    def __contains__(self, msg_id: str) -> bool:
        return msg_id in self._buffer or any(msg_id in ids for ids in self._known)


def destination_first(messages: Sequence[Message], peer_id: int) -> List[Message]:
    """Particion estable: primero los mensajes dirigidos al peer"""
    direct = [m for m in messages if m.dst == peer_id]
    rest = [m for m in messages if m.dst != peer_id]
    return direct + rest


class Router:
    """Callbacks que el motor invoca sobre el router de cada host"""

    name = "base"
    description = ""

    def __init__(self, params: RouterParams, host: "Host", world: "World"):
        self.params = params
        self.host = host
        self.world = world
        # Mensajes entregados a este host como destino
        self.delivered: Set[str] = set()

    # ==================== RESUMENES ====================

    def summary(self) -> SummaryVector:
        return SummaryVector(self.host.buffer, self.delivered)

    def accepts(self, msg: Message) -> bool:
        """El host acepta guardar una copia del mensaje"""
        return msg.id not in self.host.buffer and msg.id not in self.delivered

    # ==================== CONTACTOS ====================

    def on_contact_up(self, peer: "Host") -> None:
        pass

    def on_contact_down(self, peer: "Host") -> None:
        pass

    def exchange_metadata(self, peer: "Router") -> None:
        """Intercambio simetrico de metadatos antes de las ofertas"""

    # ==================== COLA ====================

    def offer_list(self, peer: "Host") -> List[Message]:
        raise NotImplementedError

    def drop_order(self, buffer: Buffer) -> List[Message]:
        """FIFO: primero el mas antiguo"""
        return list(buffer)

    # ==================== CICLO DE VIDA ====================

    def on_created(self, msg: Message) -> None:
        pass

    def can_complete(self, msg: Message, peer: "Host") -> bool:
        return True

    def on_transfer_done(self, msg: Message, peer: "Host") -> Optional[Dict[str, Any]]:
        """Lado emisor; lo devuelto se entrega al receptor en on_received"""
        return None

    def on_received(self, msg: Message, sender: "Host", handoff: Optional[Dict[str, Any]]) -> None:
        self.world.store(self.host, msg)

    def on_delivered(self, msg: Message) -> None:
        self.delivered.add(msg.id)

    def on_message_gone(self, msg_id: str) -> None:
        """El mensaje salio del buffer (drop, TTL, ack)"""

    def __repr__(self):
        return f"<{type(self).__name__}(host={self.host.id})>"
