from networkx.utils import UnionFind

from dflroute.data import BroadcastTree, Topology

from . import register_router
from .base_router import BaseRouter, check_routable


def kruskal_edges(topology: Topology):
    edges = sorted(topology.edges(), key=lambda e: (topology.chi(*e), e[0], e[1]))
    forest = UnionFind(range(topology.n))
    chosen = []
    for i, j in edges:
        if forest[i] != forest[j]:
            forest.union(i, j)
            chosen.append((i, j))
            if len(chosen) == topology.n - 1:
                break
    return chosen


def kruskal_tree(topology: Topology, root: int) -> BroadcastTree:
    """Minimum-weight spanning tree, ties broken by (i, j), rooted at ``root``."""
    check_routable(topology, root)
    return BroadcastTree.from_edges(topology.n, root, kruskal_edges(topology))


@register_router("kruskal")
class KruskalRouter(BaseRouter):
    def build_tree(self, topology, root):
        return kruskal_tree(topology, root)
