# =====================================================
# FEATURES - Vector de contexto de un relevo
# =====================================================

import math
from dataclasses import astuple, dataclass
from typing import TYPE_CHECKING, Tuple

import numpy as np

from app.exceptions import FeatureError

if TYPE_CHECKING:
    from app.messaging import Message
    from app.simulation import ContactHistory, Host

FEATURE_NAMES: Tuple[str, ...] = (
    "contact_frequency",
    "buffer_occupancy",
    "hop_count",
    "message_age",
    "ttl_remaining",
)


@dataclass(frozen=True)
class RelayFeatureVector:
    """Features de un candidato a relevo para un mensaje"""
    contact_frequency: float  # contactos/hora entre candidato y destino
    buffer_occupancy: float  # fraccion [0, 1]
    hop_count: float
    message_age: float  # s
    ttl_remaining: float  # s

    def as_tuple(self) -> Tuple[float, ...]:
        return astuple(self)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)


def extract_features(msg: "Message", carrier: "Host", candidate: "Host", now: float,
                     contact_history: "ContactHistory") -> RelayFeatureVector:
    """Contexto del relevo carrier -> candidate para msg en el instante now"""
    if now < msg.created_at:
        raise FeatureError(f"Instante {now} anterior a la creacion de {msg.id}")
    contacts = contact_history.completed(candidate.id, msg.dst, until=now)
    age = now - msg.created_at
    vector = RelayFeatureVector(
        contact_frequency=3600.0 * contacts / max(now, 1.0),
        buffer_occupancy=candidate.buffer.occupancy,
        hop_count=float(msg.hop_count),
        message_age=age,
        ttl_remaining=max(0.0, msg.ttl - age),
    )
    if not all(math.isfinite(v) for v in vector.as_tuple()):
        raise FeatureError(f"Feature no finita para {msg.id} en {carrier.id} -> {candidate.id}")
    if not 0.0 <= vector.buffer_occupancy <= 1.0:
        raise FeatureError(f"Ocupacion de buffer fuera de [0,1] en el host {candidate.id}")
    return vector
