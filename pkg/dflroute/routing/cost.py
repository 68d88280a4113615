import math
from typing import Dict, List

from dflroute.data import BroadcastTree, Topology


def hop_max_chi(tree: BroadcastTree, topology: Topology, i: int) -> float:
    group = tree.group(i)
    if not group:
        raise ValueError(f"node {i} has an empty broadcast group")
    return max(topology.chi(i, j) for j in group)


def tree_cost(tree: BroadcastTree, topology: Topology) -> float:
    """Sum over transmitters of the largest link weight in their broadcast group (s/bit)."""
    return math.fsum(hop_max_chi(tree, topology, i) for i in tree.transmitters)


def hop_breakdown(tree: BroadcastTree, topology: Topology) -> List[Dict]:
    rows = []
    for hop, i in enumerate(tree.transmitters):
        group = tree.group(i)
        slowest = max(group, key=lambda j: (topology.chi(i, j), -j))
        rows.append(
            {
                "hop": hop,
                "transmitter": i,
                "group": list(group),
                "max_chi": topology.chi(i, slowest),
                "slowest": slowest,
            }
        )
    return rows


def node_priority(tree: BroadcastTree, mode: str = "children") -> List[int]:
    if mode == "children":
        return [len(tree.group(i)) for i in range(tree.num_nodes)]
    elif mode == "degree":
        return [len(tree.children[i]) + (tree.parent[i] is not None) for i in range(tree.num_nodes)]
    raise ValueError(f"unknown priority mode {mode!r}")
