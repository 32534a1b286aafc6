# =====================================================
# DATASET - Ejemplos de relevo etiquetados desde logs
# =====================================================

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Set, Tuple

import numpy as np
from loguru import logger

from app.eventlog import EventKind, EventLog
from app.exceptions import DatasetError
from app.features import FEATURE_NAMES

SPLIT_STREAM = 3
MIN_EXAMPLES = 5


@dataclass
class Dataset:
    """Matriz de features (n x 5) y etiquetas {0, 1}"""
    X: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return int(self.y.shape[0])

    @classmethod
    def empty(cls) -> "Dataset":
        return cls(np.empty((0, len(FEATURE_NAMES))), np.empty(0, dtype=np.int64))

    @classmethod
    def concat(cls, parts: Iterable["Dataset"]) -> "Dataset":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(np.vstack([p.X for p in parts]), np.concatenate([p.y for p in parts]))

    @property
    def positives(self) -> int:
        return int(self.y.sum())


def delivered_paths(event_log: EventLog) -> Dict[str, Set[int]]:
    """Hosts que aparecen en algun camino de copia entregado, por mensaje"""
    paths: Dict[Tuple[str, int], List[int]] = {}
    on_delivered: Dict[str, Set[int]] = {}
    for event in event_log:
        if event.kind is EventKind.CREATED:
            paths[(event.msg_id, event.src)] = [event.src]
        elif event.kind is EventKind.RELAYED:
            parent = paths.get((event.msg_id, event.src), [event.src])
            paths[(event.msg_id, event.dst)] = parent + [event.dst]
        elif event.kind is EventKind.DELIVERED:
            path = paths.get((event.msg_id, event.dst), [event.src, event.dst])
            on_delivered.setdefault(event.msg_id, set()).update(path)
    return on_delivered


def build_dataset(event_log: EventLog) -> Dataset:
    """Un ejemplo por relevo a->b; etiqueta 1 si b esta en un camino entregado"""
    relayed = [e for e in event_log if e.kind is EventKind.RELAYED]
    if not relayed:
        logger.warning("El log no tiene eventos relayed: dataset vacio")
        return Dataset.empty()
    if any(e.features is None for e in relayed):
        raise DatasetError("El log no fue generado en modo collect (faltan columnas de features)")

    on_delivered = delivered_paths(event_log)
    X = np.array([e.features.as_tuple() for e in relayed], dtype=float)
    y = np.array([int(e.dst in on_delivered.get(e.msg_id, ())) for e in relayed], dtype=np.int64)
    return Dataset(X, y)


def split_dataset(ds: Dataset, train_fraction: float = 0.8, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """Permutacion uniforme por semilla; los primeros ceil(f*n) a entrenamiento"""
    n = len(ds)
    if n < MIN_EXAMPLES:
        raise DatasetError(f"Dataset demasiado chico para dividir: {n} ejemplos (minimo {MIN_EXAMPLES})")
    order = np.random.default_rng([seed, SPLIT_STREAM]).permutation(n)
    cut = math.ceil(round(train_fraction * n, 9))
    train, test = order[:cut], order[cut:]
    return Dataset(ds.X[train], ds.y[train]), Dataset(ds.X[test], ds.y[test])
