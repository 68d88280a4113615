from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import networkx as nx

from dflroute.data import Topology

SCHEDULE_SCHEMA = "dflroute.schedule/1"


@dataclass
class Schedule:
    slot_of_client: Tuple[int, ...]
    edge_color: Dict[Tuple[int, int], int]
    colors_used: int
    frames: int = 1
    slot_s: float = 1.0
    schema: str = field(default=SCHEDULE_SCHEMA, repr=False)

    def is_proper(self) -> bool:
        seen = {}
        for (i, j), color in self.edge_color.items():
            for v in (i, j):
                if (v, color) in seen:
                    return False
                seen[(v, color)] = (i, j)
        return True

    def edges_by_color(self) -> List[List[Tuple[int, int]]]:
        out = [[] for _ in range(self.colors_used)]
        for edge, color in sorted(self.edge_color.items()):
            out[color].append(edge)
        return out

    def to_dict(self) -> Dict:
        return {
            "frames": self.frames,
            "slot_s": self.slot_s,
            "slots": [{"slot": s, "client": c} for s, c in enumerate(self.slot_of_client)],
            "colors_used": self.colors_used,
            "colors": [
                {"color": k, "edges": [list(e) for e in edges]} for k, edges in enumerate(self.edges_by_color())
            ],
            "schema": self.schema,
        }


def _lexicographic(graph, colors):
    return sorted(graph, key=lambda e: (min(e), max(e)))


def tdma_schedule(topology: Topology, frames: int = 1, slot_s: float = 1.0) -> Schedule:
    """Collision-free link schedule.

    Client ``n`` owns slot ``n`` of every frame; links get a greedy proper edge
    colouring (edges in lexicographic order, smallest free colour), which uses
    at most ``2 * max_degree - 1`` colours.
    """
    line = nx.line_graph(topology.graph)
    coloring = nx.coloring.greedy_color(line, strategy=_lexicographic)
    edge_color = {(min(e), max(e)): c for e, c in coloring.items()}
    return Schedule(
        slot_of_client=tuple(range(topology.n)),
        edge_color=dict(sorted(edge_color.items())),
        colors_used=(max(edge_color.values()) + 1) if edge_color else 0,
        frames=frames,
        slot_s=slot_s,
    )
