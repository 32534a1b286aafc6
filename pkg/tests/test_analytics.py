# =====================================================
# TESTS - Reportes, pruebas pareadas y salidas
# =====================================================

import itertools

import numpy as np
import pandas as pd
import pytest
from scipy import integrate, stats

from app.analytics import (
    COMPARISON_COLUMNS,
    REPORT_COLUMNS,
    _exact_signed_rank_p,
    compare_reports,
    compute_report,
    paired_t_test,
    summarize,
    wilcoxon_signed_rank,
    write_deliveries,
    write_outputs,
)
from app.eventlog import EventKind, EventRecord
from app.exceptions import DegenerateTestError, ReportError, StatTestError
from app.schemas import MessageStatsReport


def _log():
    return [
        EventRecord(0.0, EventKind.CREATED, "M1", 0, 3, 10, 0),
        EventRecord(1.0, EventKind.STARTED, "M1", 0, 1, 10, 0),
        EventRecord(1.0, EventKind.RELAYED, "M1", 0, 1, 10, 1),
        EventRecord(2.0, EventKind.STARTED, "M1", 0, 2, 10, 0),
        EventRecord(2.0, EventKind.RELAYED, "M1", 0, 2, 10, 1),
        EventRecord(3.0, EventKind.STARTED, "M1", 1, 3, 10, 1),
        EventRecord(5.0, EventKind.RELAYED, "M1", 1, 3, 10, 2),
        EventRecord(5.0, EventKind.DELIVERED, "M1", 1, 3, 10, 2),
        EventRecord(6.0, EventKind.CREATED, "M2", 2, 0, 10, 0),
        EventRecord(7.0, EventKind.STARTED, "M2", 2, 1, 10, 0),
        EventRecord(8.0, EventKind.RELAYED, "M2", 2, 1, 10, 1),
        EventRecord(9.0, EventKind.DROPPED, "M2", 1, None, 10, 1, "buffer_full"),
        EventRecord(9.0, EventKind.STARTED, "M2", 2, 0, 10, 0),
        EventRecord(9.5, EventKind.ABORTED, "M2", 2, 0, 10, 0, "link_down"),
    ]


def _report(router: str, seed: int, **metrics) -> MessageStatsReport:
    return MessageStatsReport(scenario_id="s", seed=seed, router=router, created=10, delivered=5, **metrics)


def _brute_force_wilcoxon(d):
    d = np.asarray(d, dtype=float)
    d = d[d != 0]
    ranks = stats.rankdata(np.abs(d))
    w = min(ranks[d > 0].sum(), ranks[d < 0].sum())
    total = ranks.sum()
    hits = 0
    for signs in itertools.product((0, 1), repeat=d.size):
        w_plus = sum(r for r, s in zip(ranks, signs) if s)
        hits += min(w_plus, total - w_plus) <= w + 1e-9
    return hits / 2 ** d.size


# ==================== REPORTE ====================

def test_report_counts_and_metrics():
    report = compute_report(_log(), scenario_id="s", seed=4, router="epidemic")
    assert (report.created, report.started, report.relayed) == (2, 5, 4)
    assert (report.aborted, report.dropped, report.removed, report.delivered) == (1, 1, 0, 1)
    assert report.delivery_prob == 0.5
    assert report.overhead_ratio == 4.0
    assert report.latency_avg == 5.0
    assert report.latency_med == 5.0
    assert report.hopcount_avg == 2.0


def test_report_without_deliveries_leaves_metrics_undefined():
    report = compute_report(_log()[:5])
    assert report.delivered == 0
    assert report.delivery_prob == 0.0
    assert report.overhead_ratio is None
    assert report.latency_avg is None


def test_report_of_empty_scenario_fails():
    with pytest.raises(ReportError):
        compute_report([EventRecord(1.0, EventKind.CONTACT_UP, src=0, dst=1)])


def test_deliveries_file(tmp_path):
    path = write_deliveries(_log(), tmp_path / "deliveries.csv")
    frame = pd.read_csv(path)
    assert frame["msg_id"].tolist() == ["M1"]
    assert frame["latency"].tolist() == [5.0]
    assert frame["hops"].tolist() == [2]


# ==================== PRUEBA T ====================

def test_paired_t_example():
    result = paired_t_test([2, 4, 6, 8, 10], [1, 2, 3, 4, 5])
    assert result.statistic == pytest.approx(4.2426, abs=1e-4)
    assert result.p_value == pytest.approx(0.01324, abs=1e-4)
    assert result.n == 5
    assert result.significant


def test_paired_t_matches_integrated_density():
    rng = np.random.default_rng(8)
    xs = rng.normal(10, 2, 12)
    ys = xs - rng.normal(0.5, 1, 12)
    result = paired_t_test(xs, ys)
    df = 11
    tail, _ = integrate.quad(lambda x: stats.t.pdf(x, df), abs(result.statistic), np.inf)
    assert result.p_value == pytest.approx(2 * tail, abs=1e-6)


def test_paired_t_degenerate():
    with pytest.raises(DegenerateTestError):
        paired_t_test([1, 2, 3], [0, 1, 2])


def test_paired_t_needs_two_pairs():
    with pytest.raises(StatTestError):
        paired_t_test([1.0], [0.0])


def test_mismatched_lengths():
    with pytest.raises(StatTestError):
        paired_t_test([1, 2, 3], [1, 2])


# ==================== WILCOXON ====================

def test_wilcoxon_small_example():
    result = wilcoxon_signed_rank([2, 4, 6], [1, 2, 3])
    assert result.statistic == 0.0
    assert result.p_value == pytest.approx(0.25)
    assert not result.significant


def test_wilcoxon_tied_ranks():
    result = wilcoxon_signed_rank([5, 0], [0, 5])
    assert result.statistic == 1.5
    assert result.p_value == 1.0


def test_wilcoxon_zero_differences_are_discarded():
    result = wilcoxon_signed_rank([1, 2, 3, 4], [1, 1, 1, 1])
    assert result.n == 3


def test_wilcoxon_all_zero_is_degenerate():
    with pytest.raises(DegenerateTestError):
        wilcoxon_signed_rank([1, 2], [1, 2])


def test_wilcoxon_exact_matches_enumeration():
    rng = np.random.default_rng(12)
    for _ in range(10):
        d = np.round(rng.normal(0.3, 1, int(rng.integers(3, 11))), 1)
        if not np.any(d):
            continue
        result = wilcoxon_signed_rank(d, np.zeros_like(d))
        assert result.p_value == pytest.approx(_brute_force_wilcoxon(d))


def test_normal_approximation_close_to_exact():
    d = np.arange(1, 22, dtype=float)
    d[[0, 3, 5, 8, 11, 14, 17]] *= -1
    approx = wilcoxon_signed_rank(d, np.zeros_like(d))
    ranks = stats.rankdata(np.abs(d))
    doubled = np.rint(2 * ranks).astype(np.int64)
    exact = _exact_signed_rank_p(doubled, int(round(2 * approx.statistic)))
    assert approx.n == 21
    assert abs(approx.p_value - exact) <= 0.02


# ==================== COMPARACION ====================

def test_compare_two_routers():
    reports = []
    for seed in range(6):
        reports.append(_report("a", seed, delivery_prob=0.5 + 0.01 * seed, overhead_ratio=10.0 + seed,
                               latency_avg=100.0, hopcount_avg=2.0))
        reports.append(_report("b", seed, delivery_prob=0.4 + 0.02 * seed, overhead_ratio=5.0 + seed,
                               latency_avg=100.0, hopcount_avg=None))
    rows = compare_reports(reports, ["a", "b"])
    assert len(rows) == 8
    by_key = {(r["metric"], r["method"]): r for r in rows}
    assert by_key[("delivery_prob", "paired_t")]["n"] == 6
    assert by_key[("overhead_ratio", "paired_t")]["significant"] == "degenerate"
    assert by_key[("overhead_ratio", "wilcoxon")]["significant"] == "true"
    assert by_key[("latency_avg", "wilcoxon")]["significant"] == "degenerate"
    assert by_key[("hopcount_avg", "paired_t")]["significant"] == "insufficient"
    assert by_key[("hopcount_avg", "wilcoxon")]["significant"] == "insufficient"


def test_summary_by_router():
    reports = [_report("a", 0, delivery_prob=0.2), _report("a", 1, delivery_prob=0.4),
               _report("b", 0, delivery_prob=0.9)]
    summary = summarize(reports)
    assert summary.loc["a", ("delivery_prob", "mean")] == pytest.approx(0.3)
    assert list(summary.index) == ["a", "b"]


# ==================== SALIDAS ====================

def test_write_outputs(tmp_path):
    reports = [_report(router, seed, delivery_prob=0.1 * seed, overhead_ratio=3.0)
               for router in ("a", "b") for seed in range(10)]
    comparisons = compare_reports(reports, ["a", "b"])
    written = write_outputs(reports, comparisons, tmp_path)
    frame = pd.read_csv(tmp_path / "reports.csv")
    assert len(frame) == 20
    assert list(frame.columns) == REPORT_COLUMNS
    table = pd.read_csv(tmp_path / "comparison.csv", keep_default_na=False)
    assert list(table.columns) == COMPARISON_COLUMNS
    degenerate = table[table["significant"] == "degenerate"]
    assert set(degenerate["metric"]) == {"delivery_prob", "overhead_ratio"}
    assert (degenerate["p_value"] == "").all()
    assert [p.name for p in written] == ["reports.csv", "comparison.csv"]


def test_write_outputs_with_plots(tmp_path):
    reports = [_report(router, seed, delivery_prob=0.1 * seed + (router == "b") * 0.05,
                       overhead_ratio=3.0 + seed, latency_avg=60.0 * seed, hopcount_avg=2.0)
               for router in ("a", "b") for seed in range(1, 4)]
    written = write_outputs(reports, None, tmp_path, plots=True, importance={"hop_count": 1.5})
    names = {p.name for p in written}
    assert {"delivery_prob.svg", "overhead_ratio.svg", "latency_avg.svg", "boxplots.svg",
            "feature_importance.svg"} <= names
    assert not (tmp_path / "comparison.csv").exists()
    assert (tmp_path / "boxplots.svg").read_text().lstrip().startswith("<?xml")


def test_write_outputs_requires_reports(tmp_path):
    with pytest.raises(ReportError):
        write_outputs([], None, tmp_path)
