# =====================================================
# ANALYTICS - Reportes por corrida y pruebas pareadas
# =====================================================

import math
from collections import Counter
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy import stats

from app.eventlog import EventKind, EventLog
from app.exceptions import DegenerateTestError, ReportError, StatTestError
from app.schemas import MessageStatsReport, StatTestResult

ALPHA = 0.05
EXACT_WILCOXON_MAX_N = 20

REPORT_COLUMNS = [
    "scenario_id", "seed", "router", "created", "started", "relayed", "aborted", "dropped",
    "removed", "delivered", "delivery_prob", "overhead_ratio", "latency_avg", "latency_med",
    "hopcount_avg",
]
COMPARISON_COLUMNS = ["metric", "router_a", "router_b", "method", "n", "statistic", "p_value", "significant"]
DELIVERY_COLUMNS = ["msg_id", "src", "dst", "created_at", "delivered_at", "latency", "hops"]
COMPARED_METRICS = ["delivery_prob", "overhead_ratio", "latency_avg", "hopcount_avg"]


# ==================== REPORTE POR CORRIDA ====================


def delivery_records(event_log: EventLog) -> List[dict]:
    """Una fila por mensaje entregado (primera entrega)"""
    created = {e.msg_id: e for e in event_log if e.kind is EventKind.CREATED}
    rows = []
    for event in event_log:
        if event.kind is not EventKind.DELIVERED:
            continue
        origin = created.get(event.msg_id)
        if origin is None:
            raise ReportError(f"Entrega de {event.msg_id} sin evento created")
        rows.append({
            "msg_id": event.msg_id,
            "src": origin.src,
            "dst": origin.dst,
            "created_at": origin.time,
            "delivered_at": event.time,
            "latency": event.time - origin.time,
            "hops": event.hop_count,
        })
    return rows


def compute_report(event_log: EventLog, scenario_id: str = "default", seed: int = 0,
                   router: str = "") -> MessageStatsReport:
    """Contadores y metricas de entrega, latencia, saltos y overhead"""
    counts = Counter(e.kind for e in event_log)
    created = counts[EventKind.CREATED]
    if created == 0:
        raise ReportError("Escenario vacio: no se creo ningun mensaje")
    deliveries = delivery_records(event_log)
    delivered = len(deliveries)

    report = MessageStatsReport(
        scenario_id=scenario_id,
        seed=seed,
        router=router,
        created=created,
        started=counts[EventKind.STARTED],
        relayed=counts[EventKind.RELAYED],
        aborted=counts[EventKind.ABORTED],
        dropped=counts[EventKind.DROPPED],
        removed=counts[EventKind.REMOVED],
        delivered=delivered,
        delivery_prob=delivered / created,
    )
    if delivered:
        latencies = [row["latency"] for row in deliveries]
        report.overhead_ratio = report.relayed / delivered
        report.latency_avg = sum(latencies) / delivered
        report.latency_med = float(np.median(latencies))
        report.hopcount_avg = sum(row["hops"] for row in deliveries) / delivered
    return report


# ==================== PRUEBAS PAREADAS ====================


def _differences(xs: Sequence[float], ys: Sequence[float]) -> np.ndarray:
    if len(xs) != len(ys):
        raise StatTestError(f"Muestras de distinto largo: {len(xs)} y {len(ys)}")
    return np.asarray(xs, dtype=float) - np.asarray(ys, dtype=float)


def paired_t_test(xs: Sequence[float], ys: Sequence[float], alpha: float = ALPHA) -> StatTestResult:
    """t de Student pareado, bilateral, n-1 grados de libertad"""
    d = _differences(xs, ys)
    n = d.size
    if n < 2:
        raise StatTestError(f"La prueba t necesita al menos 2 pares (hay {n})")
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise DegenerateTestError("Diferencias con varianza nula")
    t = float(d.mean()) / (sd / math.sqrt(n))
    p = min(1.0, max(0.0, float(2.0 * stats.t.sf(abs(t), n - 1))))
    return StatTestResult(method="paired_t", statistic=t, p_value=p, n=n, significant=p < alpha)


def _exact_signed_rank_p(doubled_ranks: np.ndarray, doubled_w: int) -> float:
    """Fraccion de los 2^n patrones de signo con min(W+, W-) <= W observado"""
    n = doubled_ranks.size
    total = int(doubled_ranks.sum())
    shifts = np.arange(n, dtype=np.int64)
    hits = 0
    chunk = 1 << 16
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        w_plus = bits @ doubled_ranks
        hits += int(np.count_nonzero(np.minimum(w_plus, total - w_plus) <= doubled_w))
    return hits / float(1 << n)


def wilcoxon_signed_rank(xs: Sequence[float], ys: Sequence[float], alpha: float = ALPHA) -> StatTestResult:
    """Rangos con signo; exacta hasta n = 20, normal con correcciones por encima"""
    d = _differences(xs, ys)
    if d.size == 0:
        raise StatTestError("La prueba de Wilcoxon necesita al menos 1 par")
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise DegenerateTestError("Todas las diferencias son cero")
    ranks = stats.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)

    if n <= EXACT_WILCOXON_MAX_N:
        # Rangos medios son multiplos de 0.5: se comparan al doble en enteros
        doubled = np.rint(2 * ranks).astype(np.int64)
        p = _exact_signed_rank_p(doubled, int(round(2 * w)))
    else:
        _, ties = np.unique(np.abs(d), return_counts=True)
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(ties ** 3 - ties)) / 48.0
        z = max(0.0, abs(w - mean) - 0.5) / math.sqrt(var)
        p = float(2.0 * stats.norm.sf(z))
    p = min(1.0, max(0.0, p))
    return StatTestResult(method="wilcoxon", statistic=w, p_value=p, n=n, significant=p < alpha)


def _paired_values(reports: Sequence[MessageStatsReport], router_a: str, router_b: str,
                   metric: str):
    by_key_a = {(r.scenario_id, r.seed): getattr(r, metric) for r in reports if r.router == router_a}
    by_key_b = {(r.scenario_id, r.seed): getattr(r, metric) for r in reports if r.router == router_b}
    keys = sorted(k for k in by_key_a.keys() & by_key_b.keys()
                  if by_key_a[k] is not None and by_key_b[k] is not None)
    return [by_key_a[k] for k in keys], [by_key_b[k] for k in keys]


def compare_reports(reports: Sequence[MessageStatsReport], routers: Sequence[str],
                    metrics: Sequence[str] = COMPARED_METRICS, alpha: float = ALPHA) -> List[dict]:
    """Filas de comparison.csv: metrica x par de routers x prueba"""
    rows = []
    for metric in metrics:
        for router_a, router_b in combinations(routers, 2):
            xs, ys = _paired_values(reports, router_a, router_b, metric)
            for method, test in (("paired_t", paired_t_test), ("wilcoxon", wilcoxon_signed_rank)):
                row = {"metric": metric, "router_a": router_a, "router_b": router_b,
                       "method": method, "n": len(xs), "statistic": None, "p_value": None}
                try:
                    result = test(xs, ys, alpha=alpha)
                    row.update(statistic=result.statistic, p_value=result.p_value,
                               significant=str(result.significant).lower())
                except DegenerateTestError as e:
                    logger.warning(f"Prueba {method} degenerada para {metric} {router_a} vs {router_b}: {e}")
                    row["significant"] = "degenerate"
                except StatTestError as e:
                    logger.warning(f"Prueba {method} no aplicable para {metric} {router_a} vs {router_b}: {e}")
                    row["significant"] = "insufficient"
                rows.append(row)
    return rows


def summarize(reports: Iterable[MessageStatsReport]) -> pd.DataFrame:
    """Media y desvio por router de las metricas comparadas"""
    frame = pd.DataFrame([r.model_dump() for r in reports], columns=REPORT_COLUMNS)
    if frame.empty:
        raise ReportError("No hay reportes para resumir")
    for metric in COMPARED_METRICS:
        frame[metric] = pd.to_numeric(frame[metric])
    return frame.groupby("router", sort=False)[COMPARED_METRICS].agg(["mean", "std"])


# ==================== SALIDAS ====================


def _write_csv(rows: List[dict], columns: List[str], path: Path) -> Path:
    frame = pd.DataFrame(rows, columns=columns)
    frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
    return path


def write_deliveries(event_log: EventLog, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return _write_csv(delivery_records(event_log), DELIVERY_COLUMNS, path)


def write_outputs(reports: Sequence[MessageStatsReport], comparisons: Optional[List[dict]],
                  out_dir: Union[str, Path], plots: bool = False,
                  importance: Optional[Dict[str, float]] = None) -> List[Path]:
    """reports.csv, comparison.csv (si hay pruebas) y graficos SVG opcionales"""
    if not reports:
        raise ReportError("Lista de reportes vacia")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = [_write_csv([r.model_dump() for r in reports], REPORT_COLUMNS, out / "reports.csv")]
        if comparisons is not None:
            written.append(_write_csv(comparisons, COMPARISON_COLUMNS, out / "comparison.csv"))
        if plots:
            from app import plots as charts

            written.extend(charts.plot_reports(reports, out))
            if importance:
                written.append(charts.plot_feature_importance(importance, out / "feature_importance.svg"))
    except OSError as e:
        logger.error(f"Error escribiendo salidas en {out}: {e}")
        raise ReportError(f"No se pudieron escribir las salidas en {out}: {e}") from e
    return written
