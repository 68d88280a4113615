from dflroute.data import Topology
from dflroute.operators import hop_latency

from . import register_trainer
from .dfl_trainer import DFLTrainer


@register_trainer("p2p")
class P2PTrainer(DFLTrainer):
    """Single-hop D-FL baseline: a model only reaches the sender's neighbours.

    One broadcast per client per round; its latency is set by the slowest
    neighbour link. Routing schemes and bottleneck blocks do not apply.
    """

    def __init__(self, args):
        if getattr(args, "bottleneck", None):
            raise ValueError("the p2p trainer does not model bottleneck nodes")
        super(P2PTrainer, self).__init__(args)

    def build_router(self, args):
        return None

    def route_client(self, topology: Topology, client: int):
        receivers = tuple(topology.neighbors(client))
        cost = max((topology.chi(client, j) for j in receivers), default=0.0)
        return None, receivers, cost

    def latency(self, topology: Topology, route_tree, client: int, bits: int) -> float:
        rate = min(topology.rate(client, j) for j in topology.neighbors(client))
        return hop_latency(bits, rate)

    @property
    def scheme_name(self) -> str:
        return "p2p"
