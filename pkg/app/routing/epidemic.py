# =====================================================
# ROUTING - Epidemic (inundacion por vector resumen)
# =====================================================

from typing import Container, List

from app.messaging import Buffer, Message
from app.routing.base import Router, destination_first


def epidemic_offer(buffer: Buffer, peer_summary: Container[str], peer_id: int) -> List[Message]:
    """Todo lo que el peer no tiene, primero lo dirigido a el, luego FIFO"""
    missing = [m for m in buffer if m.id not in peer_summary]
    return destination_first(missing, peer_id)


class EpidemicRouter(Router):
    name = "epidemic"
    description = "Inundacion: replica todo mensaje que el peer no conoce"

    def offer_list(self, peer) -> List[Message]:
        return epidemic_offer(self.host.buffer, peer.router.summary(), peer.id)
