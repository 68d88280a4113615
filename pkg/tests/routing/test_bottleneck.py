import numpy as np
import pytest

from dflroute.configs import BOTTLENECK_DEFAULTS
from dflroute.data import Topology, generate_rgg
from dflroute.operators import ModelSpec, full_plan, plan_for_retention
from dflroute.routing import (
    BottleneckConfig,
    cam_adjust,
    demoted_tree,
    fpsr_schedule,
    kruskal_tree,
    p_clt,
    simulate_deliveries,
    tree_cost,
)


def square():
    # 0 - 1 - 2 is the fast path, 0 - 3 - 2 the slow bypass
    return Topology.from_weights(4, [(0, 1, 1e-9), (1, 2, 1e-9), (0, 3, 2e-9), (2, 3, 2e-9)])


def path():
    return Topology.from_weights(3, [(0, 1, 1e-9), (1, 2, 1e-9)])


def test_bottleneck_config():
    config = BottleneckConfig.from_dict(BOTTLENECK_DEFAULTS)
    assert config.bw_limited == {0: 0.8, 17: 0.8}
    assert config.fwd_limited == {2: 6, 5: 6, 16: 6}
    assert config.cap_elements(0, 100) == 80
    assert config.cap_elements(1, 100) is None
    for bad in (
        {"bw_limited": {"1": 0.0}},
        {"bw_limited": {"1": 1.5}},
        {"fwd_limited": {"1": -1}},
        {"param_priority": "random"},
        {"segments": 0},
    ):
        with pytest.raises(ValueError):
            BottleneckConfig.from_dict(bad)


def test_demoted_tree():
    topology = square()
    tree = demoted_tree(topology, 0, [1])
    tree.validate(topology)
    assert 1 not in tree.transmitters
    assert tree.parent == (None, 0, 3, 0)
    # the root itself is never demoted
    assert demoted_tree(topology, 0, [0]) == p_clt(topology, 0)[0]
    assert demoted_tree(path(), 0, [1]) is None


def test_cam_detours_around_capped_relay():
    topology = square()
    tree, _ = p_clt(topology, 0)
    assert 1 in tree.transmitters
    assert tree_cost(tree, topology) == pytest.approx(3e-9)

    decision = cam_adjust(topology, 0, tree, BottleneckConfig(bw_limited={1: 0.5}), None, 1000, 1, 3e-6)
    assert decision.strategy == "detour"
    assert decision.traverse_retention == pytest.approx(0.5)
    assert decision.retention == pytest.approx(0.75)
    assert 1 not in decision.tree.transmitters


def test_cam_traverses_when_cheaper():
    topology = square()
    tree, _ = p_clt(topology, 0)

    decision = cam_adjust(topology, 0, tree, BottleneckConfig(bw_limited={1: 0.9}), None, 1000, 1, 3e-6)
    assert decision.strategy == "traverse"
    assert decision.retention == pytest.approx(0.9)
    assert decision.detour_retention == pytest.approx(0.75)
    assert decision.tree == tree

    # the deadline binds before the cap does
    decision = cam_adjust(topology, 0, tree, BottleneckConfig(bw_limited={1: 0.5}), None, 1000, 1, 1e-6)
    assert decision.strategy == "traverse"
    assert decision.retention == pytest.approx(1.0 / 3.0)
    assert decision.detour_retention is None

    config = BottleneckConfig(bw_limited={1: 0.5})
    decision = cam_adjust(path(), 0, kruskal_tree(path(), 0), config, None, 1000, 1, 2e-6)
    assert decision.strategy == "traverse"
    assert decision.retention == pytest.approx(0.5)
    assert decision.detour_feasible is False


def test_fpsr_runs_out_of_budget():
    topology = path()
    plan = full_plan(ModelSpec((2, 2)))
    config = BottleneckConfig(fwd_limited={1: 1}, segments=2)
    for reroute in (False, True):
        remaining = dict(config.fwd_limited)
        result = fpsr_schedule(topology, 0, kruskal_tree(topology, 0), plan, config, remaining, reroute=reroute)
        assert result.masks[1].tolist() == [True, True, True, True]
        assert result.masks[2].tolist() == [True, True, False, False]
        assert result.lost == {1: 0, 2: 2}
        assert result.forwards == {1: 1}
        assert result.exhausted == (1,)
        assert result.reroutes == 0
        assert remaining == {1: 0}


def test_fpsr_reroutes_around_exhausted_relay():
    topology = square()
    plan = full_plan(ModelSpec((2, 2)))
    config = BottleneckConfig(fwd_limited={1: 1}, segments=2)
    tree, _ = p_clt(topology, 0)
    result = fpsr_schedule(topology, 0, tree, plan, config, dict(config.fwd_limited))
    assert result.reroutes == 1
    assert result.exhausted == (1,)
    assert all(lost == 0 for lost in result.lost.values())
    assert result.delivered_total == 3 * plan.retained_count


def test_fpsr_caps_and_priority():
    topology = path()
    plan = full_plan(ModelSpec((2, 2)))
    tree = kruskal_tree(topology, 0)
    layer = fpsr_schedule(topology, 0, tree, plan, BottleneckConfig(bw_limited={1: 0.5}, segments=1), {})
    assert layer.masks[2].tolist() == [True, True, False, False]
    assert layer.lost[2] == 2
    reverse = BottleneckConfig(bw_limited={1: 0.5}, segments=1, param_priority="reverse")
    result = fpsr_schedule(topology, 0, tree, plan, reverse, {})
    assert result.masks[2].tolist() == [False, False, True, True]


def test_forwarding_budget_is_shared_between_senders():
    topology = path()
    plan = full_plan(ModelSpec((2, 2)))
    routes = [(kruskal_tree(topology, m), plan) for m in range(3)]
    config = BottleneckConfig(fwd_limited={1: 1}, segments=1)
    results = simulate_deliveries(topology, routes, config)
    assert results[0].delivered(2) == 4
    assert results[1].delivered(0) == 4 and results[1].delivered(2) == 4
    assert results[2].delivered(1) == 4
    assert results[2].delivered(0) == 0
    assert results[2].lost[0] == 4

    results = simulate_deliveries(topology, [routes[0], (routes[1][0], None), routes[2]], config)
    assert results[1] is None


def test_deliveries_conserve_elements():
    topology = generate_rgg(20, 0.6, seed=0)
    config = BottleneckConfig.from_dict(BOTTLENECK_DEFAULTS)
    spec = ModelSpec((16, 32, 4))
    routes = []
    for m in range(topology.n):
        routes.append((p_clt(topology, m)[0], plan_for_retention(spec, 0.5 if m % 2 else 1.0)))
    results = simulate_deliveries(topology, routes, config)
    for (tree, plan), result in zip(routes, results):
        for j, mask in result.masks.items():
            assert not np.any(mask & ~plan.indicator)
            assert result.delivered(j) + result.lost[j] == plan.retained_count
        for node, count in result.forwards.items():
            assert count <= config.fwd_limited[node]


if __name__ == "__main__":
    test_bottleneck_config()
    test_demoted_tree()
    test_cam_detours_around_capped_relay()
    test_cam_traverses_when_cheaper()
    test_fpsr_runs_out_of_budget()
    test_fpsr_reroutes_around_exhausted_relay()
    test_fpsr_caps_and_priority()
    test_forwarding_budget_is_shared_between_senders()
    test_deliveries_conserve_elements()
