# =====================================================
# GBDT - Boosting de arboles de segundo orden (perdida logistica)
# =====================================================
# Entrenamiento exacto (todos los puntos medios), inferencia, importancia
# por ganancia, evaluacion y serializacion JSON del modelo.

import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError
from scipy.special import expit
from scipy.stats import rankdata

from app.exceptions import DatasetError, ModelFormatError
from app.features import FEATURE_NAMES, RelayFeatureVector
from app.schemas import GbdtParams, TrainReport

MODEL_VERSION = 1
_PROB_EPS = 1e-16

# ==================== MODELO ====================


class SplitNode(BaseModel):
    """Nodo interno: va a la izquierda si x[feature] < threshold"""
    model_config = ConfigDict(extra="forbid")

    feature: int = Field(..., ge=0, lt=len(FEATURE_NAMES))
    threshold: float
    left: int = Field(..., ge=1)
    right: int = Field(..., ge=1)
    # Opcional: solo alimenta la importancia de features
    gain: float = Field(0.0, ge=0.0)


class LeafNode(BaseModel):
    model_config = ConfigDict(extra="forbid")

    leaf: float


class Tree(BaseModel):
    nodes: List[Union[SplitNode, LeafNode]] = Field(..., min_length=1)


class GbdtModel(BaseModel):
    """Clasificador de relevos serializable"""
    model_config = ConfigDict(extra="forbid")

    version: int = MODEL_VERSION
    feature_names: List[str] = Field(default_factory=lambda: list(FEATURE_NAMES))
    base_score: float
    learning_rate: float
    trees: List[Tree] = Field(default_factory=list)

    _compiled: Optional[list] = PrivateAttr(default=None)

    def compiled(self) -> list:
        """Arreglos numpy por arbol para prediccion vectorizada"""
        if self._compiled is None:
            compiled = []
            for tree in self.trees:
                size = len(tree.nodes)
                feature = np.full(size, -1, dtype=np.int64)
                threshold = np.zeros(size)
                left = np.zeros(size, dtype=np.int64)
                right = np.zeros(size, dtype=np.int64)
                value = np.zeros(size)
                for i, node in enumerate(tree.nodes):
                    if isinstance(node, SplitNode):
                        feature[i], threshold[i], left[i], right[i] = (
                            node.feature, node.threshold, node.left, node.right)
                    else:
                        value[i] = node.leaf
                compiled.append((feature, threshold, left, right, value))
            self._compiled = compiled
        return self._compiled


def _leaf_value(tree: Tree, x: Sequence[float]) -> float:
    node = tree.nodes[0]
    while isinstance(node, SplitNode):
        node = tree.nodes[node.left] if x[node.feature] < node.threshold else tree.nodes[node.right]
    return node.leaf


def _clip(p):
    return np.clip(p, _PROB_EPS, 1.0 - _PROB_EPS)


def predict_prob(model: GbdtModel, x: Union[RelayFeatureVector, Sequence[float]]) -> float:
    """sigmoid(base + sum(eta * hoja)) para un vector"""
    values = x.as_tuple() if isinstance(x, RelayFeatureVector) else tuple(x)
    margin = model.base_score
    for tree in model.trees:
        margin += model.learning_rate * _leaf_value(tree, values)
    return float(_clip(expit(margin)))


def predict_margin_batch(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    margin = np.full(X.shape[0], model.base_score)
    rows = np.arange(X.shape[0])
    for feature, threshold, left, right, value in model.compiled():
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = feature[node] >= 0
        while active.any():
            current = node[active]
            go_left = X[rows[active], feature[current]] < threshold[current]
            node[active] = np.where(go_left, left[current], right[current])
            active = feature[node] >= 0
        margin += model.learning_rate * value[node]
    return margin


def predict_prob_batch(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    return _clip(expit(predict_margin_batch(model, X)))


def feature_importance(model: GbdtModel) -> Dict[str, float]:
    """Ganancia total por feature (0 si nunca se usa)"""
    gains = {name: 0.0 for name in model.feature_names}
    for tree in model.trees:
        for node in tree.nodes:
            if isinstance(node, SplitNode):
                gains[model.feature_names[node.feature]] += node.gain
    return gains


# ==================== ENTRENAMIENTO ====================


def log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = _clip(np.asarray(p, dtype=float))
    y = np.asarray(y, dtype=float)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _best_split(X: np.ndarray, g: np.ndarray, h: np.ndarray,
                params: GbdtParams) -> Optional[Tuple[int, float, float]]:
    """(feature, umbral, ganancia) de mayor ganancia; empates por (feature, umbral)"""
    n = X.shape[0]
    lam, min_leaf = params.l2_lambda, params.min_leaf_examples
    G, H = g.sum(), h.sum()
    parent = G * G / (H + lam) if H + lam > 0 else 0.0
    best = None
    best_gain = 0.0
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="stable")
        xs = X[order, feature]
        GL = np.cumsum(g[order])[:-1]
        HL = np.cumsum(h[order])[:-1]
        GR, HR = G - GL, H - HL
        left_count = np.arange(1, n)
        valid = (xs[:-1] != xs[1:]) & (left_count >= min_leaf) & (n - left_count >= min_leaf)
        if not valid.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent) - params.min_split_gain
        gain = np.where(valid & np.isfinite(gain), gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            threshold = (xs[i] + xs[i + 1]) / 2.0
            if threshold <= xs[i]:
                threshold = xs[i + 1]
            best, best_gain = (feature, float(threshold), float(gain[i])), float(gain[i])
    return best


def _grow(nodes: list, X: np.ndarray, g: np.ndarray, h: np.ndarray, idx: np.ndarray,
          depth: int, params: GbdtParams, leaf_of: np.ndarray) -> int:
    position = len(nodes)
    nodes.append(None)
    split = None
    if depth < params.max_depth and len(idx) >= 2 * params.min_leaf_examples:
        split = _best_split(X[idx], g[idx], h[idx], params)
    if split is None:
        denominator = h[idx].sum() + params.l2_lambda
        weight = -g[idx].sum() / denominator if denominator > 0 else 0.0
        nodes[position] = LeafNode(leaf=float(weight))
        leaf_of[idx] = position
        return position
    feature, threshold, gain = split
    goes_left = X[idx, feature] < threshold
    left = _grow(nodes, X, g, h, idx[goes_left], depth + 1, params, leaf_of)
    right = _grow(nodes, X, g, h, idx[~goes_left], depth + 1, params, leaf_of)
    nodes[position] = SplitNode(feature=feature, threshold=threshold, left=left, right=right, gain=gain)
    return position


def train_gbdt(X: np.ndarray, y: np.ndarray, params: GbdtParams) -> Tuple[GbdtModel, TrainReport]:
    """Boosting con gradiente y hessiano de la perdida logistica"""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(FEATURE_NAMES) or X.shape[0] != y.shape[0]:
        raise DatasetError(f"Dimensiones invalidas: X{X.shape}, y{y.shape}")
    positive = float(y.mean()) if y.size else 0.0
    if y.size == 0 or positive in (0.0, 1.0):
        raise DatasetError("El conjunto de entrenamiento necesita ambas clases")

    base_score = math.log(positive / (1.0 - positive))
    margin = np.full(y.shape[0], base_score)
    trees: List[Tree] = []
    history = [log_loss(y, expit(margin))]
    all_rows = np.arange(y.shape[0])

    for _ in range(params.rounds):
        prob = expit(margin)
        g = prob - y
        h = prob * (1.0 - prob)
        nodes: list = []
        leaf_of = np.zeros(y.shape[0], dtype=np.int64)
        _grow(nodes, X, g, h, all_rows, 0, params, leaf_of)
        values = np.array([n.leaf if isinstance(n, LeafNode) else 0.0 for n in nodes])
        margin = margin + params.learning_rate * values[leaf_of]
        trees.append(Tree(nodes=nodes))
        history.append(log_loss(y, expit(margin)))

    model = GbdtModel(base_score=base_score, learning_rate=params.learning_rate, trees=trees)
    gains = feature_importance(model)
    report = TrainReport(
        gains=gains,
        total_gain=float(sum(n.gain for t in trees for n in t.nodes if isinstance(n, SplitNode))),
        train_logloss=history[-1],
        train_logloss_history=history,
        n_train=int(y.shape[0]),
    )
    logger.debug(f"GBDT entrenado: {len(trees)} arboles, log-loss {history[0]:.4f} -> {history[-1]:.4f}")
    return model, report


# ==================== EVALUACION ====================


def auc_score(y: np.ndarray, scores: np.ndarray) -> Optional[float]:
    """AUC por estadistico de rangos (rangos medios en empates)"""
    y = np.asarray(y).astype(bool)
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores, method="average")
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_points(y: np.ndarray, scores: np.ndarray) -> List[Tuple[float, float]]:
    y = np.asarray(y).astype(bool)
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        return []
    order = np.argsort(-np.asarray(scores, dtype=float), kind="stable")
    sorted_scores = np.asarray(scores, dtype=float)[order]
    tp = np.cumsum(y[order])
    fp = np.cumsum(~y[order])
    cut = np.r_[np.nonzero(np.diff(sorted_scores))[0], len(sorted_scores) - 1]
    points = [(0.0, 0.0)] + [(float(fp[i] / n_neg), float(tp[i] / n_pos)) for i in cut]
    return points


def evaluate_model(model: GbdtModel, X: np.ndarray, y: np.ndarray) -> dict:
    """Fragmento de TrainReport sobre el conjunto de prueba"""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise DatasetError("El conjunto de prueba esta vacio")
    scores = predict_prob_batch(model, X)
    predicted = scores >= 0.5
    actual = y.astype(bool)
    return {
        "test_auc": auc_score(actual, scores),
        "test_accuracy": float(np.mean(predicted == actual)),
        "test_logloss": log_loss(y, scores),
        "confusion": {
            "tp": int(np.sum(predicted & actual)),
            "fp": int(np.sum(predicted & ~actual)),
            "tn": int(np.sum(~predicted & ~actual)),
            "fn": int(np.sum(~predicted & actual)),
        },
        "roc": roc_points(actual, scores),
        "n_test": int(y.size),
    }


# ==================== SERIALIZACION ====================


def serialize_model(model: GbdtModel) -> str:
    return model.model_dump_json()


def parse_model(text: str) -> GbdtModel:
    """Cargar y validar un modelo (version, nombres y orden de features, hijos)"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"Modelo malformado: {e}") from e
    if not isinstance(raw, dict):
        raise ModelFormatError("Modelo malformado: se esperaba un objeto JSON")
    if raw.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"Version de modelo no soportada: {raw.get('version')}")
    if raw.get("feature_names") != list(FEATURE_NAMES):
        raise ModelFormatError(
            f"Features del modelo {raw.get('feature_names')} no coinciden con {list(FEATURE_NAMES)}"
        )
    try:
        model = GbdtModel.model_validate(raw)
    except ValidationError as e:
        raise ModelFormatError(f"Modelo malformado: {e}") from e
    for t, tree in enumerate(model.trees):
        size = len(tree.nodes)
        for i, node in enumerate(tree.nodes):
            if isinstance(node, SplitNode) and not (i < node.left < size and i < node.right < size):
                raise ModelFormatError(f"Arbol {t}: hijos invalidos en el nodo {i}")
    return model


def save_model(model: GbdtModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_model(model), encoding="utf-8")
    return path


def load_model(path: Union[str, Path]) -> GbdtModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFormatError(f"No se pudo leer el modelo {path}: {e}") from e
    return parse_model(text)


@lru_cache(maxsize=16)
def _load_cached(path: str, mtime_ns: int) -> GbdtModel:
    return load_model(path)


def load_model_cached(path: Union[str, Path]) -> GbdtModel:
    """Modelo inmutable compartido entre hosts y corridas del proceso"""
    resolved = Path(path).resolve()
    try:
        mtime = resolved.stat().st_mtime_ns
    except OSError as e:
        raise ModelFormatError(f"No se pudo leer el modelo {path}: {e}") from e
    return _load_cached(str(resolved), mtime)
