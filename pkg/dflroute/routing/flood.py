import networkx as nx

from dflroute.data import BroadcastTree, Topology

from . import register_router
from .base_router import BaseRouter, check_routable


def flood_tree(topology: Topology, root: int) -> BroadcastTree:
    """Breadth-first flooding.

    Each node's parent is the smallest-id neighbour one hop closer to the
    root. A transmitter broadcasts to all of its topology neighbours, so its
    group is its full neighbourhood.
    """
    check_routable(topology, root)
    level = nx.single_source_shortest_path_length(topology.graph, root)
    parent = [None] * topology.n
    for v in range(topology.n):
        if v != root:
            parent[v] = min(u for u in topology.neighbors(v) if level[u] == level[v] - 1)
    groups = {i: topology.neighbors(i) for i in range(topology.n)}
    return BroadcastTree(root, parent, groups=groups)


@register_router("flood")
class FloodRouter(BaseRouter):
    def build_tree(self, topology, root):
        return flood_tree(topology, root)
