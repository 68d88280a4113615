import math
from typing import Iterator, List, Optional, Tuple

from dflroute.data import BroadcastTree, Topology

from . import register_router
from .base_router import BaseRouter, RoutingConfig, check_routable
from .cost import node_priority
from .kruskal import kruskal_tree


def _ancestors(parent, v):
    out = set()
    while parent[v] is not None:
        v = parent[v]
        out.add(v)
    return out


def _group_max(topology, c, group):
    return max((topology.chi(c, u) for u in group), default=0.0)


def modify_links(tree: BroadcastTree, topology: Topology, condition: str, config: RoutingConfig) -> BroadcastTree:
    """One sweep of link modification over the whole tree.

    Nodes are processed in waves starting from the root. For the current node
    ``c`` every neighbour ``v`` outside c's broadcast group is considered in
    order of increasing link weight; ``v`` is re-parented to ``c`` when the
    link passes ``condition`` and the tree cost does not grow. ``condition``
    is ``"theta"`` (weight within ``theta`` of c's slowest link) or ``"max"``
    (weight not above c's slowest link).
    """
    if condition not in ("theta", "max"):
        raise ValueError(f"unknown link condition {condition!r}")
    if tree.has_group_override:
        raise ValueError("link modification needs a tree whose broadcast groups are its children")
    n = topology.n
    root = tree.root
    parent = list(tree.parent)
    children = [set(c) for c in tree.children]
    priority = node_priority(tree, config.priority_mode)
    scale = topology.max_chi() if config.theta_scale == "max" else 1.0
    if scale <= 0:
        scale = 1.0

    processed = set()
    pending = []
    wave = [root]
    while len(processed) < n:
        if not wave:
            wave = [v for v in range(n) if v not in processed]
        for c in wave:
            if c in processed:
                continue
            processed.add(c)
            pending.extend(sorted(children[c]))
            # both conditions compare against c's current group; a leaf has none
            if not children[c]:
                continue
            ancestors = _ancestors(parent, c)
            candidates = sorted(
                (v for v in topology.neighbors(c) if v not in children[c] and v != root and v not in ancestors),
                key=lambda v: (topology.chi(c, v), v),
            )
            for v in candidates:
                chi_cv = topology.chi(c, v)
                old_c = _group_max(topology, c, children[c])
                if condition == "theta":
                    passes = not config.use_link_threshold or abs(chi_cv - old_c) / scale <= config.theta
                else:
                    passes = chi_cv <= old_c
                if not passes:
                    continue
                p = parent[v]
                old_p = _group_max(topology, p, children[p])
                new_c = max(old_c, chi_cv)
                new_p = _group_max(topology, p, children[p] - {v})
                if math.fsum([new_c, new_p, -old_c, -old_p]) > 0:
                    continue
                children[p].discard(v)
                children[c].add(v)
                parent[v] = c
                pending.append(v)
        wave = [v for v in dict.fromkeys(pending) if v not in processed]
        pending = []
        if config.use_node_priority:
            wave.sort(key=lambda v: (-priority[v], v))
    return BroadcastTree(root, parent)


def p_clt_stages(
    topology: Topology, root: int, config: Optional[RoutingConfig] = None
) -> Iterator[Tuple[str, BroadcastTree]]:
    """Yield ``(stage, tree)`` snapshots: the rooted MST, the theta stage and each max stage."""
    config = config or RoutingConfig()
    check_routable(topology, root)
    tree = kruskal_tree(topology, root)
    yield "mst", tree
    if config.use_condition_theta:
        tree = modify_links(tree, topology, "theta", config)
        yield "theta", tree
    if config.use_condition_max:
        for psi in range(1, config.iterations + 1):
            tree = modify_links(tree, topology, "max", config)
            yield f"max_{psi}", tree


def p_clt(topology: Topology, root: int, config: Optional[RoutingConfig] = None) -> Tuple[BroadcastTree, List[int]]:
    tree = None
    for _, tree in p_clt_stages(topology, root, config):
        pass
    return tree, list(tree.transmitters)


@register_router("p_clt")
class PCLTRouter(BaseRouter):
    r"""Client-aware link-threshold routing.

    Starts from the minimum spanning tree and regroups links so that each hop
    broadcasts over links of similar weight:

    .. math::
        C_m = \sum_{i \in I_m} \max_{j \in N(i)} \chi_{(i, j)}

    is never increased by a stage.
    """

    use_node_priority = True
    use_link_threshold = True
    use_condition_theta = True
    use_condition_max = True

    @staticmethod
    def add_args(parser):
        """Add router-specific arguments to the parser."""
        # fmt: off
        parser.add_argument("--theta", type=float, default=0.1)
        parser.add_argument("--iterations", type=int, default=3)
        parser.add_argument("--theta-scale", type=str, default="max", choices=["max", "raw"])
        parser.add_argument("--priority-mode", type=str, default="children", choices=["children", "degree"])
        # fmt: on

    @classmethod
    def build_router_from_args(cls, args):
        return cls(
            RoutingConfig(
                theta=args.theta,
                iterations=args.iterations,
                use_node_priority=cls.use_node_priority,
                use_link_threshold=cls.use_link_threshold,
                use_condition_theta=cls.use_condition_theta,
                use_condition_max=cls.use_condition_max,
                theta_scale=getattr(args, "theta_scale", "max"),
                priority_mode=getattr(args, "priority_mode", "children"),
            )
        )

    def __init__(self, config: Optional[RoutingConfig] = None):
        super(PCLTRouter, self).__init__()
        self.config = config or RoutingConfig(
            use_node_priority=self.use_node_priority,
            use_link_threshold=self.use_link_threshold,
            use_condition_theta=self.use_condition_theta,
            use_condition_max=self.use_condition_max,
        )

    def build_tree(self, topology, root):
        return p_clt(topology, root, self.config)[0]

    def stages(self, topology, root):
        return list(p_clt_stages(topology, root, self.config))


@register_router("np_clt")
class NPCLTRouter(PCLTRouter):
    use_node_priority = False


@register_router("p_nclt")
class PNCLTRouter(PCLTRouter):
    use_link_threshold = False


@register_router("np_nclt")
class NPNCLTRouter(PCLTRouter):
    use_node_priority = False
    use_link_threshold = False


@register_router("cond18_only")
class ThetaOnlyRouter(PCLTRouter):
    use_condition_max = False


@register_router("cond19_only")
class MaxOnlyRouter(PCLTRouter):
    use_condition_theta = False
