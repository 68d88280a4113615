import numpy as np

from dflroute.configs import config_to_args, load_config
from dflroute.experiments import build_topology
from dflroute.routing import cam_adjust
from dflroute.tasks import build_task
from dflroute.utils import jain_index

SEEDS = (1, 2)


def get_default_args(config, scheme="p_clt", policy="optimal", retention=None, seed=1):
    args = config_to_args(config, scheme, policy, retention, seed, config["topology"]["n"])
    args.progress = False
    args.record_trajectory = False
    return args


def mean_final_acc(config, topology, scheme, policy, retention=None):
    accs = []
    for seed in SEEDS:
        task = build_task(get_default_args(config, scheme, policy, retention, seed))
        accs.append(task.train(topology).summary()["Acc"])
    return float(np.mean(accs))


def delivery_fairness(config, topology):
    task = build_task(get_default_args(config))
    _, indicators, _ = task.trainer.prepare(task, topology)
    counts = indicators.sum(dim=2).numpy()
    return jain_index(counts.sum(axis=0) - np.diag(counts))


def test_optimal_retention_beats_fixed_policies():
    config = load_config({"rounds": 40})
    topology = build_topology(config)
    optimal = mean_final_acc(config, topology, "p_clt", "optimal")
    assert optimal > mean_final_acc(config, topology, "p_clt", "none")
    assert optimal > mean_final_acc(config, topology, "p_clt", "fixed", 0.6)


def test_p_clt_matches_or_beats_baseline_routers():
    config = load_config({"rounds": 40})
    topology = build_topology(config)
    p_clt = mean_final_acc(config, topology, "p_clt", "optimal")
    for scheme in ("kruskal", "bellman", "flood"):
        assert p_clt >= mean_final_acc(config, topology, scheme, "optimal")


def test_cam_and_rerouting_improve_fairness():
    for topology_seed in range(1, 10):
        enhanced = load_config({"topology": {"seed": topology_seed}}, preset="bottleneck")
        baseline = load_config(
            {"topology": {"seed": topology_seed}, "bottleneck": {"cam": False, "reroute": False}}, preset="bottleneck"
        )
        topology = build_topology(enhanced)
        assert delivery_fairness(enhanced, topology) >= delivery_fairness(baseline, topology)


def test_cam_never_lowers_retention():
    for topology_seed in range(1, 10):
        config = load_config({"topology": {"seed": topology_seed}}, preset="bottleneck")
        topology = build_topology(config)
        trainer = build_task(get_default_args(config)).trainer
        for root in range(topology.n):
            tree, _, _ = trainer.route_client(topology, root)
            decision = cam_adjust(
                topology,
                root,
                tree,
                trainer.bottleneck,
                trainer.routing_config,
                trainer.wire_params,
                trainer.bits_per_param,
                trainer.budget.t_max_s,
            )
            assert decision.strategy in ("traverse", "detour")
            assert decision.retention >= decision.traverse_retention


if __name__ == "__main__":
    test_optimal_retention_beats_fixed_policies()
    test_p_clt_matches_or_beats_baseline_routers()
    test_cam_and_rerouting_improve_fairness()
    test_cam_never_lowers_retention()
