# =====================================================
# TESTS - Epidemic, Spray-and-Wait, MaxProp y compuerta ML
# =====================================================

import itertools
import math
from types import SimpleNamespace

import numpy as np
import pytest

from app.gbdt import GbdtModel, LeafNode, SplitNode, Tree
from app.messaging import Buffer, Message
from app.routing import ROUTERS, router_catalog
from app.routing.epidemic import epidemic_offer
from app.routing.maxprop import (
    ack_exchange,
    maxprop_order_queue,
    maxprop_path_cost,
    maxprop_update_likelihood,
    path_costs,
)
from app.routing.mlmaxprop import mlmaxprop_gate
from app.routing.spray_and_wait import snw_offer, split_copies
from app.eventlog import EventKind
from app.simulation import ContactHistory, run_simulation
from tests.helpers import dense_scenario


def _msg(seq: int, dst: int = 9, hop_count: int = 0, created_at: float = 0.0, size: int = 10) -> Message:
    return Message(id=f"M{seq}", seq=seq, src=0, dst=dst, size=size, created_at=created_at,
                   ttl=1000, hop_count=hop_count)


def _buffer(*messages: Message) -> Buffer:
    buffer = Buffer(10_000)
    for msg in messages:
        buffer.add(msg)
    return buffer


def _logit(p: float) -> float:
    return math.log(p / (1 - p))


# ==================== EPIDEMIC ====================

def test_epidemic_offers_missing_destination_first():
    buffer = _buffer(_msg(1, dst=2), _msg(2, dst=1), _msg(3, dst=1))
    offered = epidemic_offer(buffer, {"M3"}, peer_id=1)
    assert [m.id for m in offered] == ["M2", "M1"]


def test_epidemic_offers_nothing_known():
    buffer = _buffer(_msg(1), _msg(2))
    assert epidemic_offer(buffer, {"M1", "M2"}, peer_id=4) == []


# ==================== SPRAY-AND-WAIT ====================

def test_binary_split():
    assert split_copies(8) == (4, 4)
    assert split_copies(5) == (2, 3)
    assert split_copies(2) == (1, 1)


def test_spray_phase_and_wait_phase():
    buffer = _buffer(_msg(1, dst=9), _msg(2, dst=9))
    offers = snw_offer(buffer, {"M1": 8, "M2": 1}, set(), peer_id=5)
    assert [(o.msg.id, o.sender_keeps, o.receiver_gets) for o in offers] == [("M1", 4, 4)]


def test_wait_phase_still_delivers_to_destination():
    buffer = _buffer(_msg(1, dst=5))
    offers = snw_offer(buffer, {"M1": 1}, set(), peer_id=5)
    assert [(o.msg.id, o.receiver_gets) for o in offers] == [("M1", 0)]


def test_copies_are_conserved_while_spraying():
    copies = [8]
    while any(c > 1 for c in copies):
        c = next(c for c in copies if c > 1)
        copies.remove(c)
        copies.extend(split_copies(c))
    assert sum(copies) == 8
    assert len(copies) == 8


def test_snw_wait_phase_only_delivers(grid_map_path):
    copies_at_start = 4
    events = run_simulation(dense_scenario(grid_map_path, "snw", snw_copies=copies_at_start))
    destination = {}
    copies = {}
    wait_deliveries = 0
    for e in events:
        if e.kind == EventKind.CREATED:
            destination[e.msg_id] = e.dst
            copies[(e.src, e.msg_id)] = copies_at_start
        elif e.kind == EventKind.RELAYED:
            held = copies[(e.src, e.msg_id)]
            if e.dst == destination[e.msg_id]:
                wait_deliveries += held == 1
                continue
            # Un portador con una sola copia solo entrega al destino
            assert held > 1, e
            keeps, gets = split_copies(held)
            copies[(e.src, e.msg_id)] = keeps
            copies[(e.dst, e.msg_id)] = gets
        elif e.kind in (EventKind.DROPPED, EventKind.REMOVED):
            copies.pop((e.src, e.msg_id), None)
    assert wait_deliveries > 0


# ==================== MAXPROP ====================

def test_likelihood_update_example():
    table = {}
    maxprop_update_likelihood(table, 1)
    assert table == {1: 1.0}
    maxprop_update_likelihood(table, 2)
    assert table == {1: 0.5, 2: 0.5}
    maxprop_update_likelihood(table, 1)
    assert table[1] == pytest.approx(0.75)
    assert table[2] == pytest.approx(0.25)


def test_likelihood_always_sums_to_one():
    rng = np.random.default_rng(2)
    table = {}
    for peer in rng.integers(0, 10, size=200):
        maxprop_update_likelihood(table, int(peer))
        assert sum(table.values()) == pytest.approx(1.0)
        assert all(0.0 <= v <= 1.0 for v in table.values())


def test_path_cost_prefers_relay():
    snapshot = {0: {1: 0.75, 2: 0.25}, 1: {2: 0.9}}
    assert maxprop_path_cost(snapshot, 0, 2) == pytest.approx(0.35)
    assert maxprop_path_cost(snapshot, 0, 1) == pytest.approx(0.25)


def test_path_cost_unknown_destination_is_infinite():
    assert maxprop_path_cost({0: {1: 1.0}}, 0, 7) == math.inf
    assert maxprop_path_cost({0: {1: 1.0}}, 0, 0) == 0.0


def _brute_force_cost(snapshot, src, dst):
    nodes = set(snapshot)
    for table in snapshot.values():
        nodes.update(table)
    others = [n for n in nodes if n not in (src, dst)]
    best = math.inf
    for size in range(len(others) + 1):
        for middle in itertools.permutations(others, size):
            path = (src, *middle, dst)
            if any(a not in snapshot for a in path[:-1]):
                continue
            cost = sum(1.0 - snapshot[a].get(b, 0.0) for a, b in zip(path, path[1:]))
            best = min(best, cost)
    return best


def test_path_cost_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(25):
        snapshot = {}
        for owner in range(5):
            if owner == 0 or rng.random() < 0.7:
                table = {}
                for _ in range(int(rng.integers(1, 6))):
                    maxprop_update_likelihood(table, int(rng.choice([p for p in range(6) if p != owner])))
                snapshot[owner] = table
        costs = path_costs(snapshot, 0)
        for dst in range(1, 6):
            expected = _brute_force_cost(snapshot, 0, dst)
            assert costs.get(dst, math.inf) == pytest.approx(expected)


def test_queue_order_low_hops_then_cost():
    messages = [
        _msg(1, dst=3, hop_count=4),
        _msg(2, dst=2, hop_count=0, created_at=50),
        _msg(3, dst=4, hop_count=1, created_at=10),
        _msg(4, dst=2, hop_count=3),
        _msg(5, dst=9, hop_count=0, created_at=20),
    ]
    costs = {2: 0.4, 3: 0.2, 4: 0.9}
    transmit, drop = maxprop_order_queue(messages, costs, hop_threshold=3)
    assert [m.id for m in transmit] == ["M5", "M2", "M3", "M1", "M4"]
    assert [m.id for m in drop] == ["M4", "M1", "M3", "M2", "M5"]


def test_unknown_destination_goes_last():
    messages = [_msg(1, dst=7, hop_count=5), _msg(2, dst=2, hop_count=5)]
    transmit, _ = maxprop_order_queue(messages, {2: 1.5}, hop_threshold=3)
    assert [m.id for m in transmit] == ["M2", "M1"]


def test_ack_exchange_removes_acked_copies():
    buffer = _buffer(_msg(2), _msg(3))
    merged, stale = ack_exchange({"M1"}, {"M2"}, buffer)
    assert merged == {"M1", "M2"}
    assert stale == ["M2"]


# ==================== COMPUERTA ML ====================

def _constant_model(p: float) -> GbdtModel:
    return GbdtModel(base_score=_logit(p), learning_rate=0.1, trees=[])


def _hosts():
    carrier = SimpleNamespace(id=0, buffer=Buffer(100))
    peer = SimpleNamespace(id=1, buffer=Buffer(100))
    return carrier, peer


def test_gate_threshold():
    carrier, peer = _hosts()
    msg = _msg(1, dst=9)
    model = _constant_model(0.7)
    assert mlmaxprop_gate(model, msg, carrier, peer, 10.0, 0.5, ContactHistory())
    assert not mlmaxprop_gate(model, msg, carrier, peer, 10.0, 0.8, ContactHistory())


def test_gate_always_passes_destination():
    carrier, peer = _hosts()
    msg = _msg(1, dst=peer.id)
    assert mlmaxprop_gate(_constant_model(0.01), msg, carrier, peer, 10.0, 0.99, ContactHistory())


def test_gate_without_model_is_maxprop():
    carrier, peer = _hosts()
    assert mlmaxprop_gate(None, _msg(1), carrier, peer, 10.0, 1.0, ContactHistory())


def test_gate_uses_features():
    # Arbol que separa por ttl_remaining (indice 4)
    tree = Tree(nodes=[SplitNode(feature=4, threshold=500.0, left=1, right=2),
                       LeafNode(leaf=-20.0), LeafNode(leaf=20.0)])
    model = GbdtModel(base_score=0.0, learning_rate=1.0, trees=[tree])
    carrier, peer = _hosts()
    fresh = Message(id="M1", seq=1, src=0, dst=9, size=10, created_at=0.0, ttl=1000)
    assert mlmaxprop_gate(model, fresh, carrier, peer, 100.0, 0.5, ContactHistory())
    assert not mlmaxprop_gate(model, fresh, carrier, peer, 900.0, 0.5, ContactHistory())


# ==================== REGISTRO ====================

def test_catalog_lists_every_router():
    catalog = {info.name: info for info in router_catalog()}
    assert set(catalog) == set(ROUTERS) == {"epidemic", "snw", "maxprop", "mlmaxprop"}
    assert catalog["snw"].defaults == {"snw_copies": 8}
    assert catalog["mlmaxprop"].defaults["ml_threshold"] == 0.5
