import dataclasses
import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import optuna

from dflroute.data import Topology

from .base_router import RoutingConfig
from .cost import tree_cost
from .p_clt import p_clt

logger = logging.getLogger(__name__)

THETA_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


def mean_p_clt_cost(topology: Topology, config: RoutingConfig) -> float:
    return float(np.mean([tree_cost(p_clt(topology, root, config)[0], topology) for root in range(topology.n)]))


class ThetaSearch(object):
    """Grid search of the link threshold minimizing the mean P_CLT tree cost over all roots.

    Args:
        topology: network to route on
        config: routing config whose ``theta`` is overridden per trial
        grid: candidate thresholds
    """

    def __init__(self, topology: Topology, config: Optional[RoutingConfig] = None, grid: Sequence[float] = THETA_GRID):
        self.topology = topology
        self.config = config or RoutingConfig()
        self.grid = list(grid)
        self.costs: Dict[float, float] = {}

    def _objective(self, trial):
        theta = trial.suggest_categorical("theta", self.grid)
        if theta not in self.costs:
            config = dataclasses.replace(self.config, theta=theta)
            self.costs[theta] = mean_p_clt_cost(self.topology, config)
        return self.costs[theta]

    def run(self) -> Tuple[float, float]:
        optuna.logging.set_verbosity(optuna.logging.WARNING)
        study = optuna.create_study(direction="minimize", sampler=optuna.samplers.GridSampler({"theta": self.grid}))
        study.optimize(self._objective, n_trials=len(self.grid), n_jobs=1)
        # ties go to the smaller theta
        for theta in self.grid:
            if theta not in self.costs:
                self.costs[theta] = mean_p_clt_cost(self.topology, dataclasses.replace(self.config, theta=theta))
        best = min(self.grid, key=lambda t: (self.costs[t], t))
        logger.info("best theta %.1f with mean cost %.6e", best, self.costs[best])
        return best, self.costs[best]


def tune_theta(topology: Topology, config: Optional[RoutingConfig] = None, grid: Sequence[float] = THETA_GRID):
    """Return ``(best_theta, mean_cost, {theta: mean_cost})``."""
    if topology.n < 2:
        raise ValueError("theta tuning needs at least two clients")
    if any(not math.isfinite(t) or t < 0 for t in grid):
        raise ValueError(f"invalid theta grid {list(grid)!r}")
    search = ThetaSearch(topology, config, grid)
    best, cost = search.run()
    return best, cost, dict(sorted(search.costs.items()))
