import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch
from tqdm import tqdm

from dflroute.analysis import lemma2_lhs_dense, lemma2_rhs_counts
from dflroute.data import BroadcastTree, Topology
from dflroute.operators import (
    LatencyBudget,
    PruningError,
    aggregate_dense,
    bias_norm_sum,
    full_plan,
    ideal_global,
    optimal_retention,
    plan_for_retention,
    total_latency,
    wire_payload_bits,
)
from dflroute.routing import BottleneckConfig, build_router, cam_adjust, simulate_deliveries, tree_cost
from dflroute.utils import derive_seed, jain_index

from . import register_trainer
from .base_trainer import BaseTrainer

logger = logging.getLogger(__name__)

POLICIES = ("optimal", "fixed", "none")
ON_TIME_SLACK_S = 1e-9


@dataclass
class ClientRoute:
    client: int
    tree: Optional[BroadcastTree]
    receivers: Tuple[int, ...]
    cost: float
    r_star: float
    retention: float
    plan: Optional[object]
    payload_bits: int
    latency: float
    delivered: bool
    strategy: str = "plain"


@dataclass
class RoundMetrics:
    round: int
    loss: List[float]
    acc: List[float]
    bias_norm_sum: float
    jain: float

    @property
    def mean_loss(self) -> float:
        return float(np.mean(self.loss))

    @property
    def mean_acc(self) -> float:
        return float(np.mean(self.acc))

    @property
    def acc_spread(self) -> float:
        return float(np.max(self.acc) - np.min(self.acc))


@dataclass
class TrainResult:
    scheme: str
    policy: str
    routes: List[ClientRoute]
    rounds: List[RoundMetrics]
    weights: np.ndarray
    lemma2_lhs: np.ndarray
    lemma2_rhs: np.ndarray
    ledger: List[Tuple[int, int, int]] = field(default_factory=list)
    trajectory: Dict[str, np.ndarray] = field(default_factory=dict)

    def client_rows(self) -> List[Dict]:
        rows = []
        for metrics in self.rounds:
            for route in self.routes:
                rows.append(
                    {
                        "round": metrics.round,
                        "scheme": self.scheme,
                        "policy": self.policy,
                        "client": route.client,
                        "C_m": route.cost,
                        "r_m": route.retention,
                        "payload_bits": route.payload_bits,
                        "t_m": route.latency,
                        "delivered": int(route.delivered),
                        "loss": metrics.loss[route.client],
                        "acc": metrics.acc[route.client],
                    }
                )
        return rows

    def summary(self) -> Dict[str, float]:
        out = {
            "OnTime": float(np.mean([r.delivered for r in self.routes])),
            "Retention": float(np.mean([r.retention for r in self.routes])),
            "Latency": float(np.mean([r.latency for r in self.routes])),
        }
        if self.rounds:
            last = self.rounds[-1]
            out.update(Loss=last.mean_loss, Acc=last.mean_acc, Spread=last.acc_spread, Bias=last.bias_norm_sum)
        return out


@register_trainer("dfl")
class DFLTrainer(BaseTrainer):
    """Multi-hop D-FL: every client's pruned model travels down its own broadcast tree.

    The network is static, so trees, retention rates, pruning plans and the
    resulting transmit indicators are computed once and reused every round.
    """

    @staticmethod
    def add_args(parser):
        """Add trainer-specific arguments to the parser."""
        # fmt: off
        parser.add_argument("--rounds", type=int, default=200)
        parser.add_argument("--policy", type=str, default="optimal", choices=POLICIES)
        parser.add_argument("--retention", type=float, default=None)
        parser.add_argument("--t-max-s", type=float, default=2.0)
        parser.add_argument("--bits-per-param", type=int, default=32)
        parser.add_argument("--wire-params", type=int, default=11690000)
        # fmt: on

    @classmethod
    def build_trainer_from_args(cls, args):
        return cls(args)

    def __init__(self, args):
        if args.policy not in POLICIES:
            raise ValueError(f"unknown pruning policy {args.policy!r}")
        if args.policy == "fixed" and getattr(args, "retention", None) is None:
            raise ValueError("the fixed policy needs a retention value")
        if args.rounds < 0:
            raise ValueError(f"rounds must be non-negative, got {args.rounds}")
        self.rounds = args.rounds
        self.policy = args.policy
        self.fixed_retention = getattr(args, "retention", None)
        self.budget = LatencyBudget.build_from_args(args)
        self.bits_per_param = args.bits_per_param
        self.wire_params = getattr(args, "wire_params", None)
        self.seed = args.seed
        self.scheme = getattr(args, "scheme", "p_clt")
        self.router = self.build_router(args)
        self.routing_config = getattr(self.router, "config", None)
        block = getattr(args, "bottleneck", None)
        self.bottleneck = BottleneckConfig.from_dict(block) if block else None
        self.record_trajectory = getattr(args, "record_trajectory", True)
        self.show_progress = getattr(args, "progress", False)

    def build_router(self, args):
        return build_router(args)

    # routing

    def route_client(self, topology: Topology, client: int):
        """Return ``(tree, receivers, cost)`` for the model of ``client``."""
        tree = self.router.build_tree(topology, client)
        receivers = tuple(v for v in range(topology.n) if v != client)
        return tree, receivers, tree_cost(tree, topology)

    def latency(self, topology: Topology, route_tree, client: int, bits: int) -> float:
        return total_latency(route_tree, topology, bits)

    def policy_retention(self, r_star: float) -> float:
        if self.policy == "optimal":
            return r_star
        elif self.policy == "fixed":
            return float(self.fixed_retention)
        return 1.0

    def _finish_route(self, topology, spec, client, tree, receivers, cost, r_star, retention, strategy="plain"):
        try:
            plan = full_plan(spec) if retention >= 1.0 else plan_for_retention(spec, retention)
        except PruningError as e:
            logger.warning("client %d cannot be pruned to r=%.3g: %s", client, retention, e)
            return ClientRoute(client, tree, receivers, cost, r_star, retention, None, 0, 0.0, False, strategy)
        bits = wire_payload_bits(plan.retained_count, spec.total_params, self.wire_params, self.bits_per_param)
        t_m = self.latency(topology, tree, client, bits) if receivers else 0.0
        delivered = t_m <= self.budget.t_max_s + ON_TIME_SLACK_S
        return ClientRoute(client, tree, receivers, cost, r_star, retention, plan, bits, t_m, delivered, strategy)

    def prepare(self, task, topology: Topology):
        """Routes for every client and the per-receiver transmit indicators ``[receiver, sender, K]``."""
        spec = task.spec
        n, k = topology.n, spec.total_params
        k_wire = int(self.wire_params) if self.wire_params else k
        routes = []
        for m in range(n):
            tree, receivers, cost = self.route_client(topology, m)
            r_star, _ = optimal_retention(cost, k_wire, self.bits_per_param, self.budget.t_max_s)
            strategy = "plain"
            retention = self.policy_retention(r_star)
            if self.bottleneck is not None and self.bottleneck.cam and self.policy == "optimal":
                decision = cam_adjust(
                    topology,
                    m,
                    tree,
                    self.bottleneck,
                    self.routing_config,
                    k_wire,
                    self.bits_per_param,
                    self.budget.t_max_s,
                )
                tree, strategy, retention = decision.tree, decision.strategy, decision.retention
                cost = tree_cost(tree, topology)
            routes.append(self._finish_route(topology, spec, m, tree, receivers, cost, r_star, retention, strategy))

        indicators = torch.zeros(n, n, k, dtype=torch.float64)
        for m in range(n):
            indicators[m, m] = 1.0
        ledger = []
        if self.bottleneck is not None:
            results = simulate_deliveries(
                topology,
                [(r.tree, r.plan if r.delivered else None) for r in routes],
                self.bottleneck,
                self.routing_config,
            )
            for m, result in enumerate(results):
                if result is None:
                    continue
                for j, mask in result.masks.items():
                    indicators[j, m] = torch.tensor(mask, dtype=torch.float64)
                    if result.lost[j]:
                        ledger.append((m, j, result.lost[j]))
        else:
            for route in routes:
                if not route.delivered:
                    continue
                e = torch.tensor(route.plan.indicator, dtype=torch.float64)
                for j in route.receivers:
                    indicators[j, route.client] = e
        return routes, indicators, ledger

    # training

    def run_round(self, task, aggregated: torch.Tensor, indicators: torch.Tensor, alpha: int):
        """Train every client from its last aggregate, then aggregate what each one received.

        Returns ``(local, aggregated, global_model)`` for round ``alpha``.
        """
        n = aggregated.shape[0]
        local = torch.stack(
            [
                task.local_update(
                    aggregated[j], j, torch.Generator().manual_seed(derive_seed(self.seed, alpha, j)), alpha
                )
                for j in range(n)
            ]
        )
        weights = task.weights
        aggregated = torch.stack([aggregate_dense(j, local, indicators[j], weights) for j in range(n)])
        return local, aggregated, ideal_global(local, weights)

    def fit(self, task, topology: Topology) -> TrainResult:
        if task.num_clients != topology.n:
            raise ValueError(f"task has {task.num_clients} clients but the topology has {topology.n}")
        routes, indicators, ledger = self.prepare(task, topology)
        n, k = topology.n, task.spec.total_params
        weights = task.weights

        lhs = np.array([lemma2_lhs_dense(j, indicators[j], weights) for j in range(n)])
        counts = indicators.sum(dim=2).numpy()
        rhs = np.array([lemma2_rhs_counts(counts[j], weights.p.numpy(), k, j) for j in range(n)])
        delivered_to_others = counts.sum(axis=0) - np.diag(counts)
        try:
            jain = jain_index(delivered_to_others)
        except ValueError:
            jain = float("nan")

        init = task.initial_params(self.seed)
        aggregated = init.unsqueeze(0).repeat(n, 1)
        history = {"global_models": [init], "local_models": [aggregated], "aggregated_models": [aggregated]}
        rounds = []
        round_iter = tqdm(range(1, self.rounds + 1), disable=not self.show_progress)
        for alpha in round_iter:
            local, aggregated, global_model = self.run_round(task, aggregated, indicators, alpha)
            evals = [task.evaluate(aggregated[j]) for j in range(n)]
            metrics = RoundMetrics(
                round=alpha,
                loss=[e[0] for e in evals],
                acc=[e[1] for e in evals],
                bias_norm_sum=bias_norm_sum(aggregated, global_model),
                jain=jain,
            )
            rounds.append(metrics)
            if self.record_trajectory:
                history["global_models"].append(global_model)
                history["local_models"].append(local)
                history["aggregated_models"].append(aggregated)
            round_iter.set_description(
                f"Round: {alpha:03d}, Loss: {metrics.mean_loss:.4f}, Acc: {metrics.mean_acc:.4f}"
            )

        trajectory = {}
        if self.record_trajectory:
            trajectory = {key: torch.stack(value).numpy() for key, value in history.items()}
        return TrainResult(
            scheme=self.scheme_name,
            policy=self.policy_name,
            routes=routes,
            rounds=rounds,
            weights=weights.p.numpy(),
            lemma2_lhs=lhs,
            lemma2_rhs=rhs,
            ledger=ledger,
            trajectory=trajectory,
        )

    @property
    def scheme_name(self) -> str:
        return self.scheme

    @property
    def policy_name(self) -> str:
        if self.policy == "fixed":
            return f"fixed({self.fixed_retention:g})"
        return self.policy
