# =====================================================
# ROUTING - ML-MaxProp (MaxProp + compuerta GBDT)
# =====================================================
# La cola, el orden de descarte y los acks son los de MaxProp; el modelo
# solo decide si se ofrece un mensaje a un relevo intermedio.

from typing import Dict, List, Optional, Set

from app.features import extract_features
from app.gbdt import GbdtModel, predict_prob
from app.messaging import Message
from app.routing.maxprop import MaxPropRouter


def mlmaxprop_gate(model: Optional[GbdtModel], msg: Message, carrier, peer, now: float,
                   theta: float, contact_history) -> bool:
    """Decision de oferta: destino siempre, sin modelo siempre, si no p >= theta"""
    if peer.id == msg.dst:
        return True
    if model is None:
        return True
    features = extract_features(msg, carrier, peer, now, contact_history)
    return predict_prob(model, features) >= theta


class MLMaxPropRouter(MaxPropRouter):
    name = "mlmaxprop"
    description = "MaxProp con compuerta de reenvio GBDT (umbral theta)"

    def __init__(self, params, host, world):
        super().__init__(params, host, world)
        self.model: Optional[GbdtModel] = world.model_for(params.model_path)
        # Rechazados por la compuerta durante el contacto vigente
        self._rejected: Dict[int, Set[str]] = {}

    def offer_list(self, peer) -> List[Message]:
        candidates = super().offer_list(peer)
        if self.model is None:
            return candidates
        rejected = self._rejected.setdefault(peer.id, set())
        offered = []
        for msg in candidates:
            if msg.id in rejected:
                continue
            if mlmaxprop_gate(self.model, msg, self.host, peer, self.world.now,
                              self.params.ml_threshold, self.world.contacts):
                offered.append(msg)
            else:
                rejected.add(msg.id)
        return offered

    def on_contact_down(self, peer) -> None:
        super().on_contact_down(peer)
        self._rejected.pop(peer.id, None)
