from dataclasses import dataclass
import math
from typing import List, Tuple

from dflroute.data import BroadcastTree, Topology


@dataclass(frozen=True)
class RoutingConfig:
    theta: float = 0.1
    iterations: int = 3
    use_node_priority: bool = True
    use_link_threshold: bool = True
    use_condition_theta: bool = True
    use_condition_max: bool = True
    theta_scale: str = "max"
    priority_mode: str = "children"

    def __post_init__(self):
        if not math.isfinite(self.theta) or self.theta < 0:
            raise ValueError(f"theta must be finite and non-negative, got {self.theta!r}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be non-negative, got {self.iterations!r}")
        if self.theta_scale not in ("max", "raw"):
            raise ValueError(f"theta_scale must be 'max' or 'raw', got {self.theta_scale!r}")
        if self.priority_mode not in ("children", "degree"):
            raise ValueError(f"priority_mode must be 'children' or 'degree', got {self.priority_mode!r}")


class BaseRouter(object):
    @staticmethod
    def add_args(parser):
        """Add router-specific arguments to the parser."""
        pass

    @classmethod
    def build_router_from_args(cls, args):
        return cls()

    def build_tree(self, topology: Topology, root: int) -> BroadcastTree:
        raise NotImplementedError

    def route(self, topology: Topology, root: int) -> Tuple[BroadcastTree, List[int]]:
        check_routable(topology, root)
        tree = self.build_tree(topology, root)
        return tree, list(tree.transmitters)

    def route_all(self, topology: Topology) -> List[BroadcastTree]:
        return [self.route(topology, root)[0] for root in range(topology.n)]


def check_routable(topology: Topology, root: int):
    if not 0 <= root < topology.n:
        raise ValueError(f"root {root} out of range for {topology.n} nodes")
    if not topology.is_connected():
        raise ValueError("topology is not connected")
