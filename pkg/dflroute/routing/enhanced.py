"""Bottleneck handling: congestion avoidance (CAM) and priority forwarding with rerouting (FPSR).

Bandwidth-limited clients forward at most ``cap * K`` parameters of any one
model stream. Forwarding-limited clients relay at most ``budget`` payload
segments per round, summed over all streams.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from dflroute.data import BroadcastTree, Topology
from dflroute.operators.latency import optimal_retention
from dflroute.operators.pruning import PruningPlan, priority_order

from .base_router import RoutingConfig
from .cost import tree_cost
from .p_clt import p_clt

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BottleneckConfig:
    bw_limited: Dict[int, float] = field(default_factory=dict)
    fwd_limited: Dict[int, int] = field(default_factory=dict)
    param_priority: str = "layer"
    segments: int = 4
    cam: bool = True
    reroute: bool = True

    def __post_init__(self):
        bw = {int(k): float(v) for k, v in self.bw_limited.items()}
        fwd = {int(k): int(v) for k, v in self.fwd_limited.items()}
        for node, cap in bw.items():
            if not 0 < cap <= 1:
                raise ValueError(f"payload cap of node {node} must lie in (0, 1], got {cap!r}")
        for node, budget in fwd.items():
            if budget < 0:
                raise ValueError(f"forwarding budget of node {node} must be non-negative, got {budget!r}")
        if self.param_priority not in ("layer", "reverse"):
            raise ValueError(f"unknown parameter priority {self.param_priority!r}")
        if self.segments < 1:
            raise ValueError(f"segments must be positive, got {self.segments!r}")
        object.__setattr__(self, "bw_limited", dict(sorted(bw.items())))
        object.__setattr__(self, "fwd_limited", dict(sorted(fwd.items())))

    @classmethod
    def from_dict(cls, block: Dict) -> "BottleneckConfig":
        return cls(
            bw_limited=block.get("bw_limited") or {},
            fwd_limited=block.get("fwd_limited") or {},
            param_priority=block.get("param_priority", "layer"),
            segments=block.get("segments", 4),
            cam=block.get("cam", True),
            reroute=block.get("reroute", True),
        )

    def cap_elements(self, node: int, k_params: int) -> Optional[int]:
        if node not in self.bw_limited:
            return None
        return int(math.floor(self.bw_limited[node] * k_params + 1e-9))


def demoted_tree(
    topology: Topology, root: int, demoted: Iterable[int], config: Optional[RoutingConfig] = None
) -> Optional[BroadcastTree]:
    """P_CLT tree in which the ``demoted`` clients never transmit.

    The tree is routed over the clients that may relay; each demoted client
    is then hung as a leaf under the neighbour whose slowest link grows the
    least. Returns ``None`` when the relaying clients are disconnected or a
    demoted client has no relaying neighbour.
    """
    demoted = set(demoted) - {root}
    if not demoted:
        return p_clt(topology, root, config)[0]
    keep = [v for v in range(topology.n) if v not in demoted]
    sub, labels = topology.subgraph(keep)
    if not sub.is_connected():
        return None
    if any(all(u in demoted for u in topology.neighbors(d)) for d in demoted):
        return None

    subtree, _ = p_clt(sub, labels.index(root), config)
    parent = [None] * topology.n
    group_max = {}
    for k, p in enumerate(subtree.parent):
        if p is not None:
            parent[labels[k]] = labels[p]
            group_max[labels[p]] = max(group_max.get(labels[p], 0.0), topology.chi(labels[p], labels[k]))
    for d in sorted(demoted):
        relays = [u for u in topology.neighbors(d) if u not in demoted]
        _, u = min((max(0.0, topology.chi(u, d) - group_max.get(u, 0.0)), u) for u in relays)
        parent[d] = u
        group_max[u] = max(group_max.get(u, 0.0), topology.chi(u, d))
    return BroadcastTree(root, parent)


@dataclass
class CamDecision:
    strategy: str
    tree: BroadcastTree
    retention: float
    traverse_retention: float
    detour_retention: Optional[float] = None
    detour_feasible: Optional[bool] = None


def cam_adjust(
    topology: Topology,
    root: int,
    tree: BroadcastTree,
    bottleneck: BottleneckConfig,
    config: Optional[RoutingConfig],
    k_params: int,
    bits_per_param: int,
    t_max_s: float,
) -> CamDecision:
    """Choose between pruning down to the caps on the current tree and detouring around capped clients."""
    r_opt, _ = optimal_retention(tree_cost(tree, topology), k_params, bits_per_param, t_max_s)
    caps = [bottleneck.bw_limited[i] for i in tree.transmitters if i in bottleneck.bw_limited]
    traverse = min([r_opt] + caps)
    if traverse >= r_opt:
        return CamDecision("traverse", tree, traverse, traverse)

    detour = demoted_tree(topology, root, bottleneck.bw_limited, config)
    if detour is None:
        logger.debug("client %d: no detour around %s", root, list(bottleneck.bw_limited))
        return CamDecision("traverse", tree, traverse, traverse, detour_feasible=False)
    r_detour, _ = optimal_retention(tree_cost(detour, topology), k_params, bits_per_param, t_max_s)
    if root in bottleneck.bw_limited and detour.transmitters:
        r_detour = min(r_detour, bottleneck.bw_limited[root])
    if r_detour > traverse:
        return CamDecision("detour", detour, r_detour, traverse, r_detour, True)
    return CamDecision("traverse", tree, traverse, traverse, r_detour, True)


@dataclass
class DeliveryResult:
    sender: int
    retained: int
    masks: Dict[int, np.ndarray]
    lost: Dict[int, int]
    forwards: Dict[int, int]
    reroutes: int = 0
    exhausted: Tuple[int, ...] = ()

    def delivered(self, receiver: int) -> int:
        return int(self.masks[receiver].sum())

    @property
    def delivered_total(self) -> int:
        return sum(self.delivered(j) for j in self.masks)


def _push_segment(tree, segment, have, need, sender, bottleneck, remaining, forwards, sent, k_params):
    """Forward one segment down ``tree``; returns the relays that ran out of budget."""
    exhausted = []
    for i in tree.hop_order():
        group = tree.group(i)
        if not group:
            continue
        if not any(v in need for v in tree.descendants(i)):
            continue
        elements = segment[have[i, segment]]
        if elements.size == 0:
            continue
        if i != sender and i in remaining:
            if remaining[i] <= 0:
                exhausted.append(i)
                continue
            remaining[i] -= 1
            forwards[i] = forwards.get(i, 0) + 1
        cap = bottleneck.cap_elements(i, k_params)
        if cap is not None:
            elements = elements[: max(0, cap - sent.get(i, 0))]
            sent[i] = sent.get(i, 0) + int(elements.size)
        for j in group:
            have[j, elements] = True
    return exhausted


def fpsr_schedule(
    topology: Topology,
    sender: int,
    tree: BroadcastTree,
    plan: PruningPlan,
    bottleneck: BottleneckConfig,
    remaining: Dict[int, int],
    config: Optional[RoutingConfig] = None,
    reroute: Optional[bool] = None,
) -> DeliveryResult:
    """Deliver one client's pruned model in priority order under forwarding budgets.

    ``remaining`` holds the per-round forwarding budget left at each
    forwarding-limited client and is updated in place. When a relay runs dry,
    the stream switches to a tree that demotes every exhausted relay and the
    missed segment is sent again; elements that still cannot reach a
    receiver are lost.
    """
    reroute = bottleneck.reroute if reroute is None else reroute
    n, k_params = topology.n, plan.spec.total_params
    order = priority_order(plan, bottleneck.param_priority)
    segments = [s for s in np.array_split(order, bottleneck.segments) if s.size]
    have = np.zeros((n, k_params), dtype=bool)
    have[sender, plan.indicator] = True
    forwards, sent = {}, {}
    dead = set()
    reroutes = 0

    current = tree
    for segment in segments:
        while True:
            need = {j for j in range(n) if j != sender and not have[j, segment].all()}
            if not need:
                break
            starved = _push_segment(
                current, segment, have, need, sender, bottleneck, remaining, forwards, sent, k_params
            )
            fresh = [i for i in starved if i not in dead]
            if not fresh or not reroute:
                dead.update(fresh)
                break
            dead.update(fresh)
            alternative = demoted_tree(topology, sender, dead, config)
            if alternative is None:
                break
            current = alternative
            reroutes += 1

    masks, lost = {}, {}
    for j in range(n):
        if j == sender:
            continue
        masks[j] = have[j].copy()
        lost[j] = int(sum(int((~have[j, s]).sum()) for s in segments))
    return DeliveryResult(
        sender=sender,
        retained=plan.retained_count,
        masks=masks,
        lost=lost,
        forwards=forwards,
        reroutes=reroutes,
        exhausted=tuple(sorted(dead)),
    )


def simulate_deliveries(
    topology: Topology,
    routes: Sequence[Tuple[BroadcastTree, Optional[PruningPlan]]],
    bottleneck: BottleneckConfig,
    config: Optional[RoutingConfig] = None,
) -> List[Optional[DeliveryResult]]:
    """One round of FPSR for every sender in TDMA slot order, sharing the forwarding budgets."""
    remaining = dict(bottleneck.fwd_limited)
    results = []
    for sender, (tree, plan) in enumerate(routes):
        if plan is None:
            results.append(None)
            continue
        results.append(fpsr_schedule(topology, sender, tree, plan, bottleneck, remaining, config))
    return results
