"""Numerical checks of the convergence bounds on recorded runs and random instances."""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch

from dflroute.data import BroadcastTree, Topology
from dflroute.operators import ClientWeights, ReceivedSet, bottleneck_rate, lambda_coeffs, lambda_coeffs_dense
from dflroute.routing import tree_cost

BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class BoundParams:
    L: float
    mu: float
    eta_lr: float
    tau_rho: float
    p_max: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"the one-round bound needs a strongly convex task, got mu={self.mu!r}")
        if self.L < self.mu:
            raise ValueError(f"smoothness L={self.L!r} is below strong convexity mu={self.mu!r}")
        if not self.eta_lr > 0:
            raise ValueError(f"learning rate must be positive, got {self.eta_lr!r}")
        if not self.tau_rho > 0:
            raise ValueError(f"tau_rho must be positive, got {self.tau_rho!r}")
        if not 0 < self.p_max <= 1:
            raise ValueError(f"p_max must lie in (0, 1], got {self.p_max!r}")

    @property
    def contraction(self) -> float:
        eta = self.eta_lr
        return 1.0 - 2.0 * self.mu * eta + eta ** 2 * self.L ** 2

    def bias_factor(self, sum_p2: float) -> float:
        eta_l = self.eta_lr * self.L
        return (1.0 + eta_l) / self.tau_rho * (sum_p2 + eta_l * self.p_max)


def _as_p(weights) -> np.ndarray:
    if isinstance(weights, ClientWeights):
        return weights.p.numpy()
    return np.asarray(weights, dtype=np.float64).reshape(-1)


def lemma2_rhs_counts(counts: Sequence[float], weights, k_params: int, receiver: int) -> float:
    """Bias bound from the number of elements each sender got through to ``receiver``."""
    p = _as_p(weights)
    counts = np.asarray(counts, dtype=np.float64).reshape(-1)
    if counts.shape[0] != p.shape[0]:
        raise ValueError(f"{counts.shape[0]} counts for {p.shape[0]} clients")
    if bool((counts < 0).any()) or bool((counts > k_params).any()):
        raise ValueError(f"delivered counts must lie in [0, {k_params}]")
    missing = k_params - counts
    missing[receiver] = 0.0
    return math.fsum(missing * p ** 2) + math.fsum(missing) ** 2


def lemma2_rhs(retentions: Sequence[float], weights, k_params: int, receiver: int, relax_floor: bool = False) -> float:
    """Closed-form bias bound for prefix-pruned senders with retention rates ``retentions``.

    ``relax_floor`` drops the floor in ``floor(r K)``; the relaxed value never
    exceeds the floored one.
    """
    r = np.asarray(retentions, dtype=np.float64).reshape(-1)
    if bool((r <= 0).any()) or bool((r > 1).any()):
        raise ValueError("retentions must lie in (0, 1]")
    counts = r * k_params if relax_floor else np.floor(r * k_params + 1e-9)
    return lemma2_rhs_counts(counts, weights, k_params, receiver)


def lemma2_lhs_dense(receiver: int, indicators: torch.Tensor, weights: ClientWeights) -> float:
    lam = lambda_coeffs_dense(receiver, indicators, weights)
    return torch.sum(lam ** 2).item()


def lemma2_lhs_bruteforce(received: ReceivedSet, weights: ClientWeights) -> float:
    """Exact ``sum_k sum_m lambda^2`` for one receiver."""
    return torch.sum(lambda_coeffs(received, weights) ** 2).item()


def _random_instance(rng: np.random.Generator, max_clients: int, max_params: int):
    n = int(rng.integers(2, max_clients + 1))
    k = int(rng.integers(1, max_params + 1))
    raw = rng.dirichlet(np.ones(n)) + 1e-3
    p = raw / raw.sum()
    receiver = int(rng.integers(n))
    indicators = torch.zeros(n, k, dtype=torch.float64)
    counts = np.zeros(n)
    for m in range(n):
        if m == receiver:
            count = k
        elif rng.random() < 0.2:
            count = 0
        else:
            count = int(math.floor(rng.uniform(0.0, 1.0) * k + 1e-9))
        indicators[m, :count] = 1.0
        counts[m] = count
    return ClientWeights(torch.as_tensor(p)), receiver, indicators, counts


def lemma2_sweep(trials: int = 1000, seed: int = 0, max_clients: int = 8, max_params: int = 64) -> Dict:
    """Compare the exact bias against its bound on seeded random prefix deliveries."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(trials):
        weights, receiver, indicators, counts = _random_instance(rng, max_clients, max_params)
        k = indicators.shape[1]
        lhs = lemma2_lhs_dense(receiver, indicators, weights)
        rhs = lemma2_rhs_counts(counts, weights, k, receiver)
        if lhs > rhs * (1 + BOUND_SLACK) + 1e-12:
            violations += 1
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    return {"trials": trials, "seed": seed, "violations": violations, "max_ratio": worst}


def lemma1_check(
    global_models,
    aggregated_models,
    optimum,
    params: BoundParams,
    weights,
) -> List[Dict]:
    """Evaluate both sides of the one-round bound for every recorded round.

    ``global_models[a]`` is the weighted mean of the locally trained models of
    round ``a`` and ``aggregated_models[a, n]`` what client ``n`` aggregated
    at the end of it; index 0 holds the shared initial model.
    """
    g = np.asarray(global_models, dtype=np.float64)
    agg = np.asarray(aggregated_models, dtype=np.float64)
    opt = np.asarray(optimum, dtype=np.float64).reshape(-1)
    p = _as_p(weights)
    if g.shape[0] != agg.shape[0]:
        raise ValueError("global and aggregated trajectories differ in length")
    if g.shape[-1] != opt.shape[0] or agg.shape[-1] != opt.shape[0]:
        raise ValueError("trajectory and optimum differ in length")
    factor = params.bias_factor(float(np.sum(p ** 2)))

    rows = []
    for alpha in range(1, g.shape[0]):
        prev = g[alpha - 1]
        bias = float(np.sum((agg[alpha - 1] - prev[None, :]) ** 2))
        lhs = float(np.sum((g[alpha] - opt) ** 2))
        rhs = (1 + params.tau_rho) * (params.contraction * float(np.sum((prev - opt) ** 2)) + factor * bias)
        rows.append(
            {
                "round": alpha,
                "lhs": lhs,
                "rhs": rhs,
                "bias": bias,
                "holds": bool(lhs <= rhs * (1 + BOUND_SLACK) + 1e-12),
            }
        )
    return rows


def p2_reduction_identity(tree: BroadcastTree, topology: Topology, k_bits: float, t_max_s: float) -> Dict:
    """Retention bound from the tree cost against direct inversion of the latency budget."""
    if not k_bits > 0 or not t_max_s > 0:
        raise ValueError("k_bits and t_max_s must be positive")
    cost = tree_cost(tree, topology)
    r_cost = 1.0 if cost == 0 else min(1.0, t_max_s / (k_bits * cost))
    seconds_per_retention = math.fsum(k_bits / bottleneck_rate(tree, topology, i) for i in tree.transmitters)
    r_latency = 1.0 if seconds_per_retention == 0 else min(1.0, t_max_s / seconds_per_retention)
    return {
        "r_from_cost": r_cost,
        "r_from_latency_inversion": r_latency,
        "equal": math.isclose(r_cost, r_latency, rel_tol=1e-12),
    }


def summarize_lemma1(rows: List[Dict], tau_rho: Optional[float] = None) -> Dict:
    out = {
        "rounds": len(rows),
        "holds": sum(int(r["holds"]) for r in rows),
        "violations": [r["round"] for r in rows if not r["holds"]],
    }
    if tau_rho is not None:
        out["tau_rho"] = tau_rho
    return out
