import math

import networkx as nx
import pytest

from dflroute.data import (
    RadioParams,
    Topology,
    channel_gain_sq,
    dbm_to_watt,
    generate_rgg,
    link_rate,
    shannon_rate,
    target_edge_count,
)


def test_target_edge_count():
    assert target_edge_count(20, 0.6) == 114
    assert target_edge_count(5, 1.0) == 10
    assert target_edge_count(2, 1.0) == 1


def test_channel_gain():
    radio = RadioParams()
    assert channel_gain_sq(0.1, radio) == pytest.approx(9.1189e-9, rel=1e-4)
    # free space: doubling the distance quarters the gain
    assert channel_gain_sq(0.1, radio) / channel_gain_sq(0.2, radio) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        channel_gain_sq(0.0, radio)


def test_shannon_rate():
    assert shannon_rate(1.0, 30e6) == pytest.approx(30e6)
    assert shannon_rate(3.0, 10.0) == pytest.approx(20.0)
    assert shannon_rate(0.0, 30e6) == 0.0
    assert dbm_to_watt(30.0) == pytest.approx(1.0)


def test_link_rate_decreases_with_distance():
    radio = RadioParams()
    rates = [link_rate(d, radio) for d in (0.05, 0.1, 0.2, 0.5, 1.0)]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert link_rate(0.1, RadioParams(bandwidth_hz=35e6)) > link_rate(0.1, RadioParams(bandwidth_hz=23e6))


def test_radio_params_validation():
    with pytest.raises(ValueError):
        RadioParams(bandwidth_hz=0.0)
    with pytest.raises(ValueError):
        RadioParams(carrier_freq_hz=float("inf"))


def test_generate_rgg():
    for seed in range(10):
        topology = generate_rgg(20, 0.6, seed=seed)
        assert topology.n == 20
        assert topology.is_connected()
        if topology.repaired:
            assert topology.num_edges > 114
        else:
            assert topology.num_edges == 114
        for i, j in topology.edges():
            assert i < j
            assert topology.rate(i, j) > 0
            assert topology.chi(i, j) * topology.rate(i, j) == pytest.approx(1.0)


def test_generate_rgg_small_cases():
    pair = generate_rgg(2, 1.0, seed=3)
    assert pair.edges() == [(0, 1)]
    complete = generate_rgg(5, 1.0, seed=4)
    assert complete.num_edges == 10
    with pytest.raises(ValueError):
        generate_rgg(1, 1.0)
    with pytest.raises(ValueError):
        generate_rgg(10, 0.1)
    with pytest.raises(ValueError):
        generate_rgg(10, 1.5)


def test_generate_rgg_is_deterministic():
    assert generate_rgg(12, 0.5, seed=7) == generate_rgg(12, 0.5, seed=7)
    assert generate_rgg(12, 0.5, seed=7).dumps() == generate_rgg(12, 0.5, seed=7).dumps()
    assert generate_rgg(12, 0.5, seed=7) != generate_rgg(12, 0.5, seed=8)


def test_generate_rgg_repairs_components():
    # sparse draws are often disconnected before repair
    topology = generate_rgg(30, 0.08, seed=1)
    assert topology.is_connected()
    if topology.repaired:
        assert topology.num_edges > target_edge_count(30, 0.08)


def test_topology_validation():
    with pytest.raises(ValueError):
        Topology(3, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        Topology(3, [(0, 1, 1.0), (1, 0, 2.0)])
    with pytest.raises(ValueError):
        Topology(3, [(0, 1, 0.0)])
    with pytest.raises(ValueError):
        Topology(3, [(0, 5, 1.0)])
    with pytest.raises(ValueError):
        Topology(0, [])


def test_topology_accessors():
    topology = Topology.from_weights(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (0, 3, 4.0)])
    assert topology.neighbors(0) == [1, 3]
    assert topology.degree(1) == 2
    assert topology.max_degree() == 2
    assert topology.max_chi() == pytest.approx(4.0)
    assert topology.rate(2, 3) == pytest.approx(1.0 / 3.0)
    assert topology.is_connected()
    assert not Topology(3, [(0, 1, 1.0)]).is_connected()
    assert nx.is_connected(topology.graph)


def test_subgraph():
    topology = Topology.from_weights(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (0, 3, 4.0)])
    sub, labels = topology.subgraph([3, 1, 2])
    assert labels == [1, 2, 3]
    assert sub.n == 3
    assert sub.edges() == [(0, 1), (1, 2)]
    assert sub.chi(0, 1) == pytest.approx(2.0)
    assert sub.chi(1, 2) == pytest.approx(3.0)


def test_topology_file(tmp_path):
    topology = generate_rgg(8, 0.6, seed=2)
    path = str(tmp_path / "topology.json")
    topology.save(path)
    loaded = Topology.load(path)
    assert loaded == topology
    assert loaded.seed == 2
    assert loaded.positions.tolist() == topology.positions.tolist()
    assert loaded.to_dict()["edges"] == topology.to_dict()["edges"]
    data = topology.to_dict()
    data["schema"] = "dflroute.topology/0"
    with pytest.raises(ValueError):
        Topology.from_dict(data)
    assert math.isclose(loaded.max_chi(), topology.max_chi())


if __name__ == "__main__":
    test_target_edge_count()
    test_channel_gain()
    test_shannon_rate()
    test_link_rate_decreases_with_distance()
    test_generate_rgg()
    test_generate_rgg_small_cases()
    test_generate_rgg_is_deterministic()
    test_topology_validation()
    test_topology_accessors()
    test_subgraph()
