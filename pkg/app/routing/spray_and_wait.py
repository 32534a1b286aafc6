# =====================================================
# ROUTING - Spray-and-Wait binario
# =====================================================

from typing import Container, Dict, List, NamedTuple

from app.messaging import Buffer, Message
from app.routing.base import Router, destination_first


class SprayOffer(NamedTuple):
    msg: Message
    sender_keeps: int
    receiver_gets: int


def split_copies(copies: int) -> tuple:
    """(emisor, receptor) = (floor(L/2), ceil(L/2))"""
    return copies // 2, copies - copies // 2


def snw_offer(buffer: Buffer, spray_state: Dict[str, int], peer_summary: Container[str],
              peer_id: int) -> List[SprayOffer]:
    """Fase spray con L > 1; en fase wait (L = 1) solo al destino"""
    offers = []
    for msg in destination_first([m for m in buffer if m.id not in peer_summary], peer_id):
        copies = spray_state.get(msg.id, 1)
        if msg.dst == peer_id:
            offers.append(SprayOffer(msg, copies, 0))
        elif copies > 1:
            keeps, gets = split_copies(copies)
            offers.append(SprayOffer(msg, keeps, gets))
    return offers


class SprayAndWaitRouter(Router):
    name = "snw"
    description = "Spray-and-Wait binario con cuota inicial L de copias"

    def __init__(self, params, host, world):
        super().__init__(params, host, world)
        self.copies: Dict[str, int] = {}

    def on_created(self, msg: Message) -> None:
        self.copies[msg.id] = self.params.snw_copies

    def offer_list(self, peer) -> List[Message]:
        return [o.msg for o in snw_offer(self.host.buffer, self.copies, peer.router.summary(), peer.id)]

    def can_complete(self, msg: Message, peer) -> bool:
        # Otro relevo concurrente pudo agotar la cuota
        return msg.dst == peer.id or self.copies.get(msg.id, 1) > 1

    def on_transfer_done(self, msg: Message, peer):
        if msg.dst == peer.id:
            return None
        keeps, gets = split_copies(self.copies.get(msg.id, 1))
        self.copies[msg.id] = keeps
        return {"copies": gets}

    def on_received(self, msg: Message, sender, handoff) -> None:
        if self.world.store(self.host, msg):
            self.copies[msg.id] = (handoff or {}).get("copies", 1)

    def on_message_gone(self, msg_id: str) -> None:
        self.copies.pop(msg_id, None)
