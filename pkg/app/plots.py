# =====================================================
# PLOTS - Graficos SVG estaticos
# =====================================================

from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from app.schemas import MessageStatsReport  # noqa: E402

# (metrica, titulo, escala logaritmica)
BAR_CHARTS = [
    ("delivery_prob", "Probabilidad de entrega", False),
    ("overhead_ratio", "Overhead (relevos / entregas)", True),
    ("latency_avg", "Latencia promedio (s)", False),
]
BOX_METRICS = ["delivery_prob", "overhead_ratio", "latency_avg", "hopcount_avg"]


def _by_router(reports: Sequence[MessageStatsReport], metric: str) -> Dict[str, List[float]]:
    values: Dict[str, List[float]] = {}
    for report in reports:
        value = getattr(report, metric)
        if value is not None:
            values.setdefault(report.router, []).append(value)
    return values


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_metric_bars(reports: Sequence[MessageStatsReport], metric: str, title: str,
                     path: Path, log_scale: bool = False) -> Path:
    values = _by_router(reports, metric)
    routers = list(values)
    means = [sum(v) / len(v) for v in values.values()]
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.bar(routers, means, color="tab:blue")
    if log_scale and means and min(means) > 0:
        ax.set_yscale("log")
    ax.set_title(title)
    ax.set_ylabel(metric)
    ax.grid(True, axis="y", linestyle="--", linewidth=0.5, alpha=0.7)
    return _save(fig, path)


def plot_boxplots(reports: Sequence[MessageStatsReport], path: Path) -> Path:
    """Distribucion por semilla de cada metrica, un panel por metrica"""
    fig, axes = plt.subplots(1, len(BOX_METRICS), figsize=(4 * len(BOX_METRICS), 4))
    for ax, metric in zip(axes, BOX_METRICS):
        values = _by_router(reports, metric)
        if values:
            ax.boxplot(list(values.values()))
            ax.set_xticks(range(1, len(values) + 1), list(values), rotation=30)
        ax.set_title(metric)
        ax.grid(True, axis="y", linestyle="--", linewidth=0.5, alpha=0.7)
    return _save(fig, path)


def plot_reports(reports: Sequence[MessageStatsReport], out_dir: Path) -> List[Path]:
    written = [
        plot_metric_bars(reports, metric, title, out_dir / f"{metric}.svg", log_scale=log)
        for metric, title, log in BAR_CHARTS
    ]
    written.append(plot_boxplots(reports, out_dir / "boxplots.svg"))
    return written


def plot_feature_importance(gains: Dict[str, float], path: Path) -> Path:
    """Ganancia total por feature"""
    ordered = sorted(gains.items(), key=lambda item: item[1])
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.barh([name for name, _ in ordered], [gain for _, gain in ordered], color="tab:green")
    ax.set_title("Importancia de features (ganancia)")
    ax.set_xlabel("gain")
    return _save(fig, path)


def plot_roc(points: Sequence[Tuple[float, float]], auc, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([p[0] for p in points], [p[1] for p in points], label=f"AUC = {auc:.3f}" if auc is not None else None)
    ax.plot([0, 1], [0, 1], color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("FPR")
    ax.set_ylabel("TPR")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    if auc is not None:
        ax.legend(loc="lower right")
    return _save(fig, path)
