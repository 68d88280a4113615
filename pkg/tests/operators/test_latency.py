import pytest

from dflroute.data import BroadcastTree, Topology, generate_rgg
from dflroute.operators import (
    LatencyBudget,
    bottleneck_rate,
    hop_latency,
    optimal_retention,
    payload_bits,
    total_latency,
    wire_payload_bits,
)
from dflroute.routing import p_clt, tree_cost
from dflroute.utils import build_args_from_dict


def star():
    return Topology(4, [(0, 1, 10.0), (0, 2, 5.0), (0, 3, 20.0)])


def test_bottleneck_rate():
    topology = star()
    tree = BroadcastTree(0, [None, 0, 0, 0])
    assert bottleneck_rate(tree, topology, 0) == pytest.approx(5.0)
    assert bottleneck_rate(tree, topology, 0) == pytest.approx(1.0 / max(topology.chi(0, j) for j in (1, 2, 3)))
    single = BroadcastTree(1, [1, None, 0, 0])
    assert bottleneck_rate(single, topology, 1) == pytest.approx(10.0)
    with pytest.raises(ValueError):
        bottleneck_rate(tree, topology, 2)


def test_hop_latency():
    assert hop_latency(100, 50.0) == pytest.approx(2.0)
    assert hop_latency(0, 50.0) == 0.0
    assert hop_latency(payload_bits(0.5, 11690000, 32), 1e8) == pytest.approx(1.8704)
    with pytest.raises(ValueError):
        hop_latency(100, 0.0)
    with pytest.raises(ValueError):
        hop_latency(-1, 1.0)


def test_total_latency():
    topology = Topology(3, [(0, 1, 4.0), (1, 2, 8.0)])
    tree = BroadcastTree(0, [None, 0, 1])
    assert total_latency(tree, topology, 8) == pytest.approx(8 / 4.0 + 8 / 8.0)
    assert total_latency(BroadcastTree(0, [None]), Topology(1, []), 1000) == 0.0

    topology = generate_rgg(12, 0.6, seed=0)
    for root in range(topology.n):
        tree, _ = p_clt(topology, root)
        assert total_latency(tree, topology, 32000) == pytest.approx(32000 * tree_cost(tree, topology), rel=1e-12)


def test_optimal_retention():
    assert optimal_retention(1e-8, 400000000, 1, 2.0) == (pytest.approx(0.5), True)
    assert optimal_retention(1e-8, 400000000, 1, 4.0)[0] == pytest.approx(1.0)
    assert optimal_retention(1e-8, 400000000, 1, 8.0)[0] == 1.0
    assert optimal_retention(1e-8, 400000000, 1, 1.0)[0] == pytest.approx(0.25)
    assert optimal_retention(0.0, 100, 32, 1.0) == (1.0, True)
    # a single parameter already takes 32 s
    r, feasible = optimal_retention(1.0, 100, 32, 2.0)
    assert not feasible
    assert r == pytest.approx(2.0 / 3200.0)
    with pytest.raises(ValueError):
        optimal_retention(-1.0, 100, 32, 1.0)
    with pytest.raises(ValueError):
        optimal_retention(1.0, 0, 32, 1.0)
    with pytest.raises(ValueError):
        optimal_retention(1.0, 100, 32, 0.0)


def test_optimal_retention_is_monotone():
    costs = [1e-10, 5e-10, 1e-9, 5e-9, 1e-8]
    rs = [optimal_retention(c, 11690000, 32, 2.0)[0] for c in costs]
    assert all(a >= b for a, b in zip(rs, rs[1:]))
    rs = [optimal_retention(1e-9, 11690000, 32, t)[0] for t in (0.5, 1.0, 2.0, 3.0)]
    assert all(a <= b for a, b in zip(rs, rs[1:]))


def test_optimal_payload_meets_deadline():
    k, bits, t_max = 11690000, 32, 2.0
    for seed in range(10):
        topology = generate_rgg(20, 0.6, seed=seed)
        for root in range(topology.n):
            tree, _ = p_clt(topology, root)
            r, _ = optimal_retention(tree_cost(tree, topology), k, bits, t_max)
            assert 0 < r <= 1
            assert total_latency(tree, topology, payload_bits(r, k, bits)) <= t_max + 1e-9


def test_wire_payload_bits():
    assert wire_payload_bits(100, 400, 1000, 32) == 8000
    assert wire_payload_bits(100, 400, None, 32) == 3200
    assert wire_payload_bits(400, 400, 11690000, 32) == 11690000 * 32
    assert payload_bits(1.0, 11690000, 32) == 11690000 * 32


def test_latency_budget():
    budget = LatencyBudget(2.0)
    assert budget.slot_s == 2.0
    assert budget.frames == 1
    assert LatencyBudget(2.0, frames=4).slot_s == pytest.approx(0.5)
    assert LatencyBudget(2.0, 0.5, 4).t_max_s == 2.0
    with pytest.raises(ValueError):
        LatencyBudget(2.0, 0.3, 4)
    with pytest.raises(ValueError):
        LatencyBudget(0.0)
    with pytest.raises(ValueError):
        LatencyBudget(1.0, frames=0)

    args = build_args_from_dict({"t_max_s": 3.0, "slot_s": None, "frames": 3})
    assert LatencyBudget.build_from_args(args) == LatencyBudget(3.0, 1.0, 3)
    assert LatencyBudget.build_from_args(build_args_from_dict({"t_max_s": 2.0})).slot_s == 2.0


if __name__ == "__main__":
    test_bottleneck_rate()
    test_hop_latency()
    test_total_latency()
    test_optimal_retention()
    test_optimal_retention_is_monotone()
    test_optimal_payload_meets_deadline()
    test_wire_payload_bits()
    test_latency_budget()
