"""Wireless topologies: free-space link rates, random geometric graphs and their JSON form.

Floats in the JSON document are written by :mod:`json` with Python's shortest
round-trip repr, so ``Topology.load(path)`` restores every position, rate and
link weight bit for bit.
"""
import json
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.utils import UnionFind

TOPOLOGY_SCHEMA = "dflroute.topology/1"


@dataclass(frozen=True)
class RadioParams:
    """Static free-space radio model shared by every link of a topology.

    Defaults follow a 2.5 GHz carrier with 30 MHz of bandwidth, 20 dBm of
    transmit power and a thermal noise density of -174 dBm/Hz.
    """

    carrier_freq_hz: float = 2.5e9
    bandwidth_hz: float = 30e6
    tx_power_dbm: float = 20.0
    noise_psd_dbm_per_hz: float = -174.0
    propagation_const: float = 3e8

    def __post_init__(self):
        for name in ("carrier_freq_hz", "bandwidth_hz", "propagation_const"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"RadioParams.{name} must be a positive finite number, got {value!r}")
        if self.tx_power_w <= 0 or self.noise_power_w <= 0:
            raise ValueError("RadioParams produce a non-positive linear power")

    @property
    def tx_power_w(self) -> float:
        return dbm_to_watt(self.tx_power_dbm)

    @property
    def noise_power_w(self) -> float:
        return dbm_to_watt(self.noise_psd_dbm_per_hz) * self.bandwidth_hz


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def channel_gain_sq(distance_km: float, radio: RadioParams) -> float:
    r"""Free-space power gain :math:`h^2 = (\lambda / (4 \pi d f_c))^2` with d in metres."""
    if not distance_km > 0:
        raise ValueError(f"distance must be positive, got {distance_km!r}")
    distance_m = distance_km * 1000.0
    return (radio.propagation_const / (4.0 * math.pi * distance_m * radio.carrier_freq_hz)) ** 2


def snr(distance_km: float, radio: RadioParams) -> float:
    return channel_gain_sq(distance_km, radio) * radio.tx_power_w / radio.noise_power_w


def shannon_rate(gamma: float, bandwidth_hz: float) -> float:
    return bandwidth_hz * math.log2(1.0 + gamma)


def link_rate(distance_km: float, radio: RadioParams) -> float:
    return shannon_rate(snr(distance_km, radio), radio.bandwidth_hz)


class Topology(object):
    """Undirected client graph with per-link rate ``v`` (bits/s) and weight ``chi = 1 / v`` (s/bit).

    The underlying :class:`networkx.Graph` stores ``rate`` and ``chi`` as edge
    attributes. Nodes are the integers ``0 .. n - 1``.
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[Tuple[int, int, float]],
        positions: Optional[np.ndarray] = None,
        area_km: Optional[float] = None,
        seed: Optional[int] = None,
        repaired: bool = False,
    ):
        if n < 1:
            raise ValueError(f"a topology needs at least one node, got n={n}")
        self.n = int(n)
        self.area_km = area_km
        self.seed = seed
        self.repaired = bool(repaired)
        if positions is None:
            positions = np.zeros((self.n, 2))
        self.positions = np.asarray(positions, dtype=np.float64).reshape(self.n, 2)

        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        for i, j, rate in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if graph.has_edge(i, j):
                raise ValueError(f"duplicate edge ({i}, {j})")
            rate = float(rate)
            if not math.isfinite(rate) or rate <= 0:
                raise ValueError(f"edge ({i}, {j}) has non-positive rate {rate!r}")
            graph.add_edge(i, j, rate=rate, chi=1.0 / rate)
        self.graph = graph

    @classmethod
    def from_weights(cls, n: int, weighted_edges: Iterable[Tuple[int, int, float]], **kwargs):
        """Build a topology from link weights chi; rates are their reciprocals."""
        return cls(n, [(i, j, 1.0 / float(chi)) for i, j, chi in weighted_edges], **kwargs)

    @property
    def num_edges(self) -> int:
        return self.graph.number_of_edges()

    def edges(self) -> List[Tuple[int, int]]:
        return sorted((min(i, j), max(i, j)) for i, j in self.graph.edges())

    def has_edge(self, i: int, j: int) -> bool:
        return self.graph.has_edge(i, j)

    def neighbors(self, i: int) -> List[int]:
        return sorted(self.graph.neighbors(i))

    def degree(self, i: int) -> int:
        return self.graph.degree(i)

    def max_degree(self) -> int:
        return max((d for _, d in self.graph.degree()), default=0)

    def rate(self, i: int, j: int) -> float:
        return self.graph.edges[i, j]["rate"]

    def chi(self, i: int, j: int) -> float:
        return self.graph.edges[i, j]["chi"]

    def max_chi(self) -> float:
        return max((d["chi"] for _, _, d in self.graph.edges(data=True)), default=0.0)

    def is_connected(self) -> bool:
        return nx.is_connected(self.graph)

    def subgraph(self, nodes: Sequence[int]) -> Tuple["Topology", List[int]]:
        """Induced sub-topology relabelled to ``0 .. len(nodes) - 1``, plus the label map."""
        labels = sorted(set(nodes))
        index = {v: k for k, v in enumerate(labels)}
        edges = [
            (index[i], index[j], self.rate(i, j))
            for i, j in self.edges()
            if i in index and j in index
        ]
        return Topology(len(labels), edges, positions=self.positions[labels], area_km=self.area_km), labels

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "area_km": self.area_km,
            "seed": self.seed,
            "positions": [[float(x), float(y)] for x, y in self.positions],
            "edges": [[i, j, self.rate(i, j), self.chi(i, j)] for i, j in self.edges()],
            "repaired": self.repaired,
            "schema": TOPOLOGY_SCHEMA,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Topology":
        schema = data.get("schema", TOPOLOGY_SCHEMA)
        if schema != TOPOLOGY_SCHEMA:
            raise ValueError(f"unsupported topology schema {schema!r}")
        topology = cls(
            data["n"],
            [(i, j, v) for i, j, v, _ in data["edges"]],
            positions=np.asarray(data["positions"], dtype=np.float64),
            area_km=data.get("area_km"),
            seed=data.get("seed"),
            repaired=data.get("repaired", False),
        )
        return topology

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def save(self, path: str):
        with open(path, "w", encoding="utf8") as f:
            f.write(self.dumps())
            f.write("\n")

    @classmethod
    def load(cls, path: str) -> "Topology":
        with open(path, "r", encoding="utf8") as f:
            return cls.from_dict(json.load(f))

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"Topology(n={self.n}, edges={self.num_edges}, repaired={self.repaired})"


def target_edge_count(n: int, density: float) -> int:
    # guard against 0.6 * 190 = 113.99999999999999
    return int(math.floor(density * n * (n - 1) / 2.0 + 1e-9))


def generate_rgg(
    n: int, density: float, area_km: float = 1.0, seed: int = 0, radio: Optional[RadioParams] = None
) -> Topology:
    """Random geometric graph joining the ``floor(density * n(n-1)/2)`` closest client pairs.

    Nodes are drawn uniformly in the ``area_km x area_km`` square. When the
    closest pairs leave the graph disconnected, the closest cross-component
    pairs are added until it is connected and the result is flagged as
    ``repaired``.
    """
    if n < 2:
        raise ValueError(f"generate_rgg needs n >= 2, got {n}")
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density!r}")
    if not area_km > 0:
        raise ValueError(f"area_km must be positive, got {area_km!r}")
    num_edges = target_edge_count(n, density)
    if num_edges < n - 1:
        raise ValueError(
            f"density {density} gives {num_edges} edges, fewer than the {n - 1} needed to connect {n} nodes"
        )
    radio = radio or RadioParams()

    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.0, area_km, size=(n, 2))
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append((float(np.hypot(*(positions[i] - positions[j]))), i, j))
    pairs.sort()

    chosen = pairs[:num_edges]
    components = UnionFind(range(n))
    for _, i, j in chosen:
        components.union(i, j)
    num_components = len({components[v] for v in range(n)})
    repaired = False
    for dist, i, j in pairs[num_edges:]:
        if num_components == 1:
            break
        if components[i] != components[j]:
            components.union(i, j)
            chosen.append((dist, i, j))
            num_components -= 1
            repaired = True

    edges = [(i, j, link_rate(dist, radio)) for dist, i, j in chosen]
    return Topology(n, edges, positions=positions, area_km=area_km, seed=seed, repaired=repaired)
