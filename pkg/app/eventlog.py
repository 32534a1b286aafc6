# =====================================================
# EVENT LOG - Registro canonico de eventos de simulacion
# =====================================================

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd

from app.exceptions import ReportError
from app.features import RelayFeatureVector

FEATURE_COLUMNS = ["f_contact_freq", "f_buf_occ", "f_hop", "f_age", "f_ttl_rem"]
BASE_COLUMNS = ["time", "event", "msg_id", "from", "to", "size", "hop_count", "reason"]
COLUMNS = BASE_COLUMNS + FEATURE_COLUMNS


class EventKind(str, enum.Enum):
    """Tipos de evento del log"""
    CREATED = "created"
    STARTED = "started"
    RELAYED = "relayed"
    ABORTED = "aborted"
    DROPPED = "dropped"
    REMOVED = "removed"
    DELIVERED = "delivered"
    CONTACT_UP = "contact_up"
    CONTACT_DOWN = "contact_down"


@dataclass(frozen=True)
class EventRecord:
    """Una linea del log"""
    time: float
    kind: EventKind
    msg_id: Optional[str] = None
    src: Optional[int] = None  # columna "from"
    dst: Optional[int] = None  # columna "to"
    size: Optional[int] = None
    hop_count: Optional[int] = None
    reason: Optional[str] = None
    features: Optional[RelayFeatureVector] = None


EventLog = List[EventRecord]


def _opt(value) -> str:
    return "" if value is None else str(value)


def _row(event: EventRecord) -> List[str]:
    row = [
        f"{event.time:.3f}", event.kind.value, _opt(event.msg_id), _opt(event.src),
        _opt(event.dst), _opt(event.size), _opt(event.hop_count), _opt(event.reason),
    ]
    if event.features is None:
        row.extend([""] * len(FEATURE_COLUMNS))
    else:
        row.extend(repr(float(v)) for v in event.features.as_tuple())
    return row


def write_event_log(events: Iterable[EventRecord], path: Union[str, Path]) -> Path:
    """Escribir el log como CSV (tiempos con 3 decimales)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([_row(e) for e in events], columns=COLUMNS, dtype=str)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def _int_or_none(value: str) -> Optional[int]:
    return int(value) if value != "" else None


def read_event_log(path: Union[str, Path]) -> EventLog:
    """Leer un log CSV; las columnas de features pueden faltar o venir vacias"""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ReportError(f"No se pudo leer el log {path}: {e}") from e
    missing = [c for c in BASE_COLUMNS if c not in frame.columns]
    if missing:
        raise ReportError(f"Log {path} sin columnas obligatorias: {', '.join(missing)}")
    has_features = all(c in frame.columns for c in FEATURE_COLUMNS)

    events = []
    for record in frame.to_dict("records"):
        features = None
        if has_features and record["f_contact_freq"] != "":
            features = RelayFeatureVector(*(float(record[c]) for c in FEATURE_COLUMNS))
        events.append(EventRecord(
            time=float(record["time"]),
            kind=EventKind(record["event"]),
            msg_id=record["msg_id"] or None,
            src=_int_or_none(record["from"]),
            dst=_int_or_none(record["to"]),
            size=_int_or_none(record["size"]),
            hop_count=_int_or_none(record["hop_count"]),
            reason=record["reason"] or None,
            features=features,
        ))
    return events
