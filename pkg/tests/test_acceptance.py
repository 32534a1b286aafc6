# =====================================================
# TESTS - Escenario denso de 12 h (lentos)
# =====================================================
# pytest -m slow

from collections import Counter

import numpy as np
import pytest

from app.eventlog import EventKind, write_event_log
from app.pipelines import cmd_compare, cmd_train, with_router
from app.scenario import load_config
from app.schemas import GbdtParams
from app.simulation import run_simulation
from tests.conftest import ROOT

pytestmark = pytest.mark.slow

SEEDS = range(10)


@pytest.fixture(scope="module")
def default_config():
    return load_config(ROOT / "scenarios" / "default.txt")


@pytest.fixture(scope="module")
def relay_counts(default_config):
    counts = {}
    for router in ("epidemic", "snw", "maxprop"):
        config = with_router(default_config, router)
        counts[router] = [
            sum(1 for e in run_simulation(config, seed=seed) if e.kind == EventKind.RELAYED)
            for seed in SEEDS
        ]
    return counts


def test_spray_and_wait_quota(default_config):
    config = with_router(default_config, "snw")
    for seed in range(20):
        events = run_simulation(config.model_copy(update={"duration": 3600.0}), seed=seed)
        destination = {e.msg_id: e.dst for e in events if e.kind == EventKind.CREATED}
        holders = Counter()
        for e in events:
            if e.kind == EventKind.RELAYED and e.dst != destination[e.msg_id]:
                holders[e.msg_id] += 1
        assert all(count + 1 <= 8 for count in holders.values())


def test_relay_overhead_ordering(relay_counts):
    epidemic, snw, maxprop = relay_counts["epidemic"], relay_counts["snw"], relay_counts["maxprop"]
    assert all(e >= 10 * s for e, s in zip(epidemic, snw))
    between = sum(1 for e, s, m in zip(epidemic, snw, maxprop) if s < m < e)
    assert between >= 8


def test_fallback_identity(default_config):
    maxprop = with_router(default_config, "maxprop")
    fallback = with_router(default_config, "mlmaxprop")
    assert run_simulation(maxprop, seed=5) == run_simulation(fallback, seed=5)


def test_learned_gate(tmp_path):
    collect = load_config(ROOT / "scenarios" / "collect_maxprop.txt")
    logs = [write_event_log(run_simulation(collect, seed=100 + seed), tmp_path / f"collect{seed}.csv")
            for seed in SEEDS]
    model_path = tmp_path / "model.json"
    report = cmd_train(logs, GbdtParams(), split_seed=0, out_model=model_path)
    assert report.test_auc >= 0.7
    assert report.gains["ttl_remaining"] > 0

    constrained = collect.model_copy(update={"collect": False})
    reports, comparisons = cmd_compare(constrained, ["maxprop", "mlmaxprop"], seeds=10,
                                       out_dir=tmp_path / "compare", model_path=str(model_path))
    base = [r for r in reports if r.router == "maxprop"]
    gated = [r for r in reports if r.router == "mlmaxprop"]
    assert sum(1 for b, g in zip(base, gated) if g.overhead_ratio <= b.overhead_ratio) >= 8
    assert np.mean([g.delivery_prob for g in gated]) >= np.mean([b.delivery_prob for b in base]) - 0.02
    overhead_t = next(row for row in comparisons
                      if row["metric"] == "overhead_ratio" and row["method"] == "paired_t")
    assert overhead_t["p_value"] < 0.05
