from typing import Dict

import networkx as nx

from dflroute.data import BroadcastTree, Topology

from . import register_router
from .base_router import BaseRouter, check_routable


def bellman_distances(topology: Topology, root: int) -> Dict[int, float]:
    _, dist = nx.bellman_ford_predecessor_and_distance(topology.graph, root, weight="chi")
    return dict(dist)


def bellman_spt(topology: Topology, root: int) -> BroadcastTree:
    """Shortest-path tree under link weights chi; ties go to the smaller predecessor."""
    check_routable(topology, root)
    pred, _ = nx.bellman_ford_predecessor_and_distance(topology.graph, root, weight="chi")
    parent = [None] * topology.n
    for v in range(topology.n):
        if v != root:
            parent[v] = min(pred[v])
    return BroadcastTree(root, parent)


@register_router("bellman")
class BellmanRouter(BaseRouter):
    def build_tree(self, topology, root):
        return bellman_spt(topology, root)
