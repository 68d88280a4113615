import copy
import csv
import dataclasses
import itertools
import json
import logging
import math
import os
from collections import defaultdict, namedtuple
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch.multiprocessing as mp
from tabulate import tabulate

from dflroute.analysis import BoundParams, lemma1_check, lemma2_sweep, summarize_lemma1
from dflroute.configs import CONFIG_SCHEMA, config_to_args, load_config
from dflroute.data import RadioParams, Topology, generate_rgg
from dflroute.models import build_model
from dflroute.operators import optimal_retention, payload_bits, tdma_schedule, total_latency
from dflroute.routing import (
    P_CLT_FAMILY,
    RoutingConfig,
    build_router,
    hop_breakdown,
    p_clt,
    tree_cost,
    tune_theta,
)
from dflroute.tasks import TASK_REGISTRY, build_task
from dflroute.utils import build_args_from_dict, makedirs, set_random_seed, tabulate_results

logger = logging.getLogger(__name__)

SUMMARY_SCHEMA = "dflroute.summary/1"
RUN_SCHEMA = "dflroute.run/1"
ROUTES_SCHEMA = "dflroute.routes/1"
ANALYSIS_SCHEMA = "dflroute.analysis/1"

CLIENT_COLUMNS = [
    "round",
    "scheme",
    "policy",
    "client",
    "C_m",
    "r_m",
    "payload_bits",
    "t_m",
    "delivered",
    "loss",
    "acc",
]
GLOBAL_COLUMNS = ["round", "mean_loss", "mean_acc", "acc_spread", "bias_norm_sum", "jain"]
LEDGER_COLUMNS = ["round", "sender", "receiver", "lost_elements"]
LATENCY_COLUMNS = ["scheme", "client", "C_m", "r_star", "t_m", "feasible"]
PSI_GRID = tuple(range(0, 6))
BANDWIDTH_GRID = (23e6, 30e6, 35e6)
TMAX_GRID = (1.0, 2.0, 3.0)
TAU_GRID = (0.1, 1.0, 10.0)


# io helpers


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path: str, data: Dict):
    with open(path, "w", encoding="utf8") as f:
        json.dump(_jsonable(data), f, indent=2)
        f.write("\n")


def read_json(path: str) -> Dict:
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing run artifact {path}")
    with open(path, "r", encoding="utf8") as f:
        return json.load(f)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Dict]):
    with open(path, "w", encoding="utf8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(header), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_csv(path: str) -> List[Dict]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing run artifact {path}")
    with open(path, "r", encoding="utf8", newline="") as f:
        return list(csv.DictReader(f))


# variants


def gen_variants(**items):
    Variant = namedtuple("Variant", items.keys())
    return itertools.starmap(Variant, itertools.product(*items.values()))


def policy_variants(config: Dict):
    """``(policy, retention)`` pairs; every fixed retention value is its own variant."""
    out = []
    for policy in config["pruning"]["policy"]:
        if policy == "fixed":
            out.extend(("fixed", float(r)) for r in config["pruning"]["fixed_retention"])
        else:
            out.append((policy, None))
    return out


def scheme_variants(config: Dict) -> List[str]:
    if config["trainer"] == "p2p":
        return ["p2p"]
    return list(config["routing"]["scheme"])


def variant_label(scheme: str, policy: str, retention: Optional[float]) -> str:
    if policy == "fixed":
        return f"{scheme}_fixed{retention:g}"
    return f"{scheme}_{policy}"


def output_results(results_dict, tablefmt="github"):
    variant = list(results_dict.keys())[0]
    col_names = ["Variant"] + list(results_dict[variant][-1].keys())
    tab_data = tabulate_results(results_dict)

    print(tabulate(tab_data, headers=col_names, tablefmt=tablefmt))


# topology


def radio_from_config(config: Dict) -> RadioParams:
    return RadioParams(**config["radio"])


def build_topology(config: Dict) -> Topology:
    topo = config["topology"]
    return generate_rgg(topo["n"], topo["density"], topo["area_km"], topo["seed"], radio_from_config(config))


def load_topology(config: Dict, path: Optional[str] = None) -> Topology:
    if path is None:
        return build_topology(config)
    if not os.path.exists(path):
        raise FileNotFoundError(f"topology file {path} does not exist")
    return Topology.load(path)


def desk_params(config: Dict) -> int:
    """Weight count of the desk-scale model the task trains."""
    task = config["task"]
    kind = task["kind"]
    model_args = build_args_from_dict(
        {
            "model": TASK_REGISTRY[kind].default_model,
            "num_features": task["features"],
            "num_classes": task["classes"] if kind == "softmax_mlp" else task["outputs"],
            "hidden_size": task["hidden_size"],
            "num_layers": 2,
            "dropout": 0.0,
        }
    )
    return build_model(model_args).num_params


def wire_params(config: Dict) -> int:
    return config["budget"]["wire_params"] or desk_params(config)


def routing_config(config: Dict, **changes) -> RoutingConfig:
    routing = config["routing"]
    base = RoutingConfig(
        theta=routing["theta"],
        iterations=routing["iterations"],
        theta_scale=routing["theta_scale"],
        priority_mode=routing["priority_mode"],
    )
    return dataclasses.replace(base, **changes)


def resolve_theta(config: Dict, topology: Topology) -> Dict:
    if not config["routing"]["tune_theta"] or topology.n < 2:
        return config
    best, cost, _ = tune_theta(topology, routing_config(config))
    logger.info("tuned theta %.1f (mean tree cost %.6e)", best, cost)
    config = copy.deepcopy(config)
    config["routing"]["theta"] = best
    return config


def cmd_gen_topology(config: Dict, out_dir: str) -> Topology:
    makedirs(out_dir)
    topology = build_topology(config)
    topology.save(os.path.join(out_dir, "topology.json"))
    budget = config["budget"]
    slot_s = budget["slot_s"] if budget["slot_s"] is not None else budget["t_max_s"] / budget["frames"]
    schedule = tdma_schedule(topology, frames=budget["frames"], slot_s=slot_s)
    write_json(os.path.join(out_dir, "schedule.json"), schedule.to_dict())
    print(f"edges: {topology.num_edges}, repaired: {str(topology.repaired).lower()}, colors: {schedule.colors_used}")
    return topology


# routing reports


def _router_args(config: Dict, scheme: str):
    routing = config["routing"]
    return build_args_from_dict(
        {
            "scheme": scheme,
            "theta": routing["theta"],
            "iterations": routing["iterations"],
            "theta_scale": routing["theta_scale"],
            "priority_mode": routing["priority_mode"],
        }
    )


def route_report(config: Dict, topology: Topology, schemes: Sequence[str]) -> Dict[str, List[Dict]]:
    """Per scheme and root: tree, cost, optimal retention and resulting latency."""
    k_wire = wire_params(config)
    bits = config["budget"]["bits_per_param"]
    t_max = config["budget"]["t_max_s"]
    report = {}
    for scheme in schemes:
        rows = []
        if topology.n >= 2:
            router = build_router(_router_args(config, scheme))
            for root in range(topology.n):
                tree, _ = router.route(topology, root)
                cost = tree_cost(tree, topology)
                r_star, feasible = optimal_retention(cost, k_wire, bits, t_max)
                t_m = total_latency(tree, topology, payload_bits(r_star, k_wire, bits))
                row = {
                    "root": root,
                    "cost": cost,
                    "r_star": r_star,
                    "t_m": t_m,
                    "feasible": feasible and t_m <= t_max + 1e-9,
                    "tree": tree.to_dict(),
                    "hops": hop_breakdown(tree, topology),
                }
                if scheme in P_CLT_FAMILY:
                    row["stages"] = [
                        {"stage": name, "cost": tree_cost(stage, topology)}
                        for name, stage in router.stages(topology, root)
                    ]
                rows.append(row)
        report[scheme] = rows
    return report


def theta_sweep(config: Dict, topology: Topology) -> List[Dict]:
    _, _, costs = tune_theta(topology, routing_config(config))
    return [{"theta": theta, "mean_cost": cost} for theta, cost in costs.items()]


def psi_sweep(config: Dict, topology: Topology, grid: Sequence[int] = PSI_GRID) -> List[Dict]:
    rows = []
    for root in range(topology.n):
        for psi in grid:
            tree, _ = p_clt(topology, root, routing_config(config, iterations=psi))
            rows.append({"root": root, "psi": psi, "cost": tree_cost(tree, topology)})
    return rows


def _mean_route(config: Dict, topology: Topology, scheme: str) -> Dict:
    rows = route_report(config, topology, [scheme])[scheme]
    return {
        "mean_cost": float(np.mean([r["cost"] for r in rows])),
        "mean_r_star": float(np.mean([r["r_star"] for r in rows])),
    }


def bandwidth_sweep(config: Dict, schemes: Sequence[str], grid: Sequence[float] = BANDWIDTH_GRID) -> List[Dict]:
    rows = []
    for bandwidth in grid:
        swept = copy.deepcopy(config)
        swept["radio"]["bandwidth_hz"] = float(bandwidth)
        topology = build_topology(swept)
        for scheme in schemes:
            rows.append({"scheme": scheme, "bandwidth_hz": float(bandwidth), **_mean_route(swept, topology, scheme)})
    return rows


def tmax_sweep(config: Dict, topology: Topology, schemes: Sequence[str], grid: Sequence[float] = TMAX_GRID):
    rows = []
    for t_max in grid:
        swept = copy.deepcopy(config)
        swept["budget"]["t_max_s"] = float(t_max)
        swept["budget"]["slot_s"] = None
        for scheme in schemes:
            rows.append({"scheme": scheme, "t_max_s": float(t_max), **_mean_route(swept, topology, scheme)})
    return rows


def cmd_route(
    config: Dict,
    out_dir: str,
    topology_path: Optional[str] = None,
    with_theta_sweep: bool = False,
    with_psi_sweep: bool = False,
    bandwidths: Optional[Sequence[float]] = None,
    t_maxes: Optional[Sequence[float]] = None,
) -> Dict[str, List[Dict]]:
    makedirs(out_dir)
    topology = load_topology(config, topology_path)
    if topology.n < 2:
        logger.warning("topology has a single client; nothing to route")
    config = resolve_theta(config, topology)
    schemes = list(config["routing"]["scheme"])
    report = route_report(config, topology, schemes)
    write_json(
        os.path.join(out_dir, "routes.json"),
        {"schema": ROUTES_SCHEMA, "config": config, "schemes": report},
    )
    latency_rows = [
        {
            "scheme": scheme,
            "client": row["root"],
            "C_m": row["cost"],
            "r_star": row["r_star"],
            "t_m": row["t_m"],
            "feasible": int(row["feasible"]),
        }
        for scheme, rows in report.items()
        for row in rows
    ]
    write_csv(os.path.join(out_dir, "latency.csv"), LATENCY_COLUMNS, latency_rows)
    table = [
        [scheme, len(rows)]
        + ([np.mean([r["cost"] for r in rows]), np.mean([r["r_star"] for r in rows]), max(r["t_m"] for r in rows)]
           if rows else [float("nan")] * 3)
        for scheme, rows in report.items()
    ]
    print(tabulate(table, headers=["Scheme", "Roots", "MeanCost", "MeanRStar", "MaxLatency"], tablefmt="github"))

    if with_theta_sweep and topology.n >= 2:
        rows = theta_sweep(config, topology)
        write_csv(os.path.join(out_dir, "theta_sweep.csv"), ["theta", "mean_cost"], rows)
        print(tabulate([[r["theta"], r["mean_cost"]] for r in rows], headers=["Theta", "MeanCost"], tablefmt="github"))
    if with_psi_sweep and topology.n >= 2:
        rows = psi_sweep(config, topology)
        write_csv(os.path.join(out_dir, "psi_sweep.csv"), ["root", "psi", "cost"], rows)
        by_psi = defaultdict(list)
        for r in rows:
            by_psi[r["psi"]].append(r["cost"])
        print(tabulate([[k, np.mean(v)] for k, v in by_psi.items()], headers=["Psi", "MeanCost"], tablefmt="github"))
    if bandwidths is not None:
        rows = bandwidth_sweep(config, schemes, bandwidths or BANDWIDTH_GRID)
        header = ["scheme", "bandwidth_hz", "mean_cost", "mean_r_star"]
        write_csv(os.path.join(out_dir, "bandwidth_sweep.csv"), header, rows)
    if t_maxes is not None and topology.n >= 2:
        rows = tmax_sweep(config, topology, schemes, t_maxes or TMAX_GRID)
        write_csv(os.path.join(out_dir, "tmax_sweep.csv"), ["scheme", "t_max_s", "mean_cost", "mean_r_star"], rows)
    return report


# simulation


def train(args, topology: Topology):
    set_random_seed(args.seed)
    logger.debug("%s", args)
    task = build_task(args)
    return task.train(topology)


def save_result(result, run_dir: str, config: Dict, job: Dict):
    makedirs(run_dir)
    write_csv(os.path.join(run_dir, "metrics.csv"), CLIENT_COLUMNS, result.client_rows())
    write_csv(
        os.path.join(run_dir, "global.csv"),
        GLOBAL_COLUMNS,
        [
            {
                "round": m.round,
                "mean_loss": m.mean_loss,
                "mean_acc": m.mean_acc,
                "acc_spread": m.acc_spread,
                "bias_norm_sum": m.bias_norm_sum,
                "jain": m.jain,
            }
            for m in result.rounds
        ],
    )
    if config["bottleneck"] is not None:
        write_csv(
            os.path.join(run_dir, "loss_ledger.csv"),
            LEDGER_COLUMNS,
            [
                {"round": m.round, "sender": s, "receiver": r, "lost_elements": lost}
                for m in result.rounds
                for s, r, lost in result.ledger
            ],
        )
    routes = [
        {
            "client": r.client,
            "C_m": r.cost,
            "r_star": r.r_star,
            "r_m": r.retention,
            "strategy": r.strategy,
            "retained": r.plan.retained_count if r.plan is not None else 0,
            "payload_bits": r.payload_bits,
            "t_m": r.latency,
            "delivered": r.delivered,
            "receivers": list(r.receivers),
            "tree": r.tree.to_dict() if r.tree is not None else None,
        }
        for r in result.routes
    ]
    write_json(
        os.path.join(run_dir, "summary.json"),
        {
            "schema": RUN_SCHEMA,
            "variant": job,
            "config": config,
            "final": result.summary(),
            "weights": result.weights,
            "lemma2": {"lhs": result.lemma2_lhs, "rhs": result.lemma2_rhs},
            "routes": routes,
        },
    )
    if result.trajectory:
        traj_dir = os.path.join(run_dir, "trajectory")
        makedirs(traj_dir)
        for key, value in result.trajectory.items():
            np.save(os.path.join(traj_dir, f"{key}.npy"), value)
        np.save(os.path.join(traj_dir, "weights.npy"), result.weights)
        np.save(os.path.join(traj_dir, "lemma2_lhs.npy"), result.lemma2_lhs)
        np.save(os.path.join(traj_dir, "lemma2_rhs.npy"), result.lemma2_rhs)


def run_variant(job: Dict):
    """Train one (scheme, policy, seed) variant and write its files; returns the final metrics."""
    config = job["config"]
    topology = Topology.from_dict(job["topology"])
    args = config_to_args(config, job["scheme"], job["policy"], job["retention"], job["seed"], topology.n)
    result = train(args, topology)
    meta = {k: job[k] for k in ("label", "scheme", "policy", "retention", "seed")}
    save_result(result, job["run_dir"], config, meta)
    return result.summary()


def cmd_simulate(config: Dict, out_dir: str, topology_path: Optional[str] = None):
    makedirs(out_dir)
    topology = load_topology(config, topology_path)
    topology.save(os.path.join(out_dir, "topology.json"))
    config = resolve_theta(config, topology)

    variants = list(gen_variants(scheme=scheme_variants(config), policy=policy_variants(config), seed=config["seeds"]))
    jobs = []
    for v in variants:
        policy, retention = v.policy
        label = variant_label(v.scheme, policy, retention)
        jobs.append(
            {
                "config": config,
                "topology": topology.to_dict(),
                "label": label,
                "scheme": v.scheme,
                "policy": policy,
                "retention": retention,
                "seed": v.seed,
                "run_dir": os.path.join(out_dir, label, f"seed_{v.seed}"),
            }
        )

    workers = min(config["workers"], len(jobs))
    if workers > 1:
        ctx = mp.get_context("spawn")
        with ctx.Pool(processes=workers) as pool:
            results = pool.map(run_variant, jobs)
    else:
        results = [run_variant(job) for job in jobs]

    results_dict = defaultdict(list)
    for job, result in zip(jobs, results):
        results_dict[job["label"]].append(result)
    summary = {
        "schema": SUMMARY_SCHEMA,
        "config": {"schema": CONFIG_SCHEMA, **config},
        "topology": {"n": topology.n, "edges": topology.num_edges, "repaired": topology.repaired},
        "variants": [
            {
                "label": label,
                "scheme": next(j["scheme"] for j in jobs if j["label"] == label),
                "policy": next(j["policy"] for j in jobs if j["label"] == label),
                "retention": next(j["retention"] for j in jobs if j["label"] == label),
                "seeds": [j["seed"] for j in jobs if j["label"] == label],
                "results": values,
                "mean": {key: float(np.mean([r[key] for r in values])) for key in values[0]},
            }
            for label, values in results_dict.items()
        ],
    }
    write_json(os.path.join(out_dir, "summary.json"), summary)
    if results_dict and all(results_dict.values()):
        output_results(results_dict)
    return results_dict


# analysis


def _distribution(values: Sequence[float]) -> Dict:
    values = np.asarray(values, dtype=np.float64)
    q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"min": q[0], "p25": q[1], "median": q[2], "p75": q[3], "max": q[4], "mean": float(np.mean(values))}


def _lemma1_report(config: Dict, variant: Dict, run_dir: str, n: int, taus: Sequence[float]) -> Dict:
    if config["task"]["kind"] != "ridge_regression":
        return {"status": "skipped", "reason": "not a ridge regression run"}
    traj_dir = os.path.join(run_dir, "trajectory")
    if not os.path.isdir(traj_dir):
        return {"status": "skipped", "reason": "no recorded trajectory"}
    args = config_to_args(config, variant["scheme"], variant["policy"], variant["retention"], variant["seed"], n)
    args.trainer = None
    task = build_task(args)
    if not task.full_batch:
        return {"status": "skipped", "reason": "local updates are not single full-batch steps"}
    big, small = task.smoothness()
    global_models = np.load(os.path.join(traj_dir, "global_models.npy"))
    aggregated = np.load(os.path.join(traj_dir, "aggregated_models.npy"))
    optimum = task.optimum().numpy()
    out = {"status": "checked", "L": big, "mu": small, "eta_lr": task.lr, "taus": []}
    for tau in taus:
        params = BoundParams(big, small, task.lr, tau, task.weights.p_max)
        rows = lemma1_check(global_models, aggregated, optimum, params, task.weights)
        report = summarize_lemma1(rows, tau)
        report["pairs"] = [[r["lhs"], r["rhs"]] for r in rows]
        out["taus"].append(report)
    return out


def cmd_analyze(run_dir: str, lemma2_trials: int = 1000, taus: Sequence[float] = TAU_GRID, seed: int = 0) -> Dict:
    summary = read_json(os.path.join(run_dir, "summary.json"))
    config = load_config(summary["config"])
    n = summary["topology"]["n"]
    variants = []
    fairness = []
    for variant in summary["variants"]:
        runs = []
        for s in variant["seeds"]:
            seed_dir = os.path.join(run_dir, variant["label"], f"seed_{s}")
            run = read_json(os.path.join(seed_dir, "summary.json"))
            global_rows = read_csv(os.path.join(seed_dir, "global.csv"))
            lhs, rhs = run["lemma2"]["lhs"], run["lemma2"]["rhs"]
            jain = global_rows[0]["jain"] if global_rows else ""
            runs.append(
                {
                    "seed": s,
                    "lemma2": {
                        "lhs": lhs,
                        "rhs": rhs,
                        "violations": sum(int(a > b * (1 + 1e-9) + 1e-12) for a, b in zip(lhs, rhs)),
                        "all_zero": all(a == 0 for a in lhs),
                    },
                    "lemma1": _lemma1_report(config, run["variant"], seed_dir, n, taus),
                    "jain": float(jain) if jain not in ("", "nan") else None,
                    "retention": _distribution([r["r_m"] for r in run["routes"]]),
                    "cost": _distribution([r["C_m"] for r in run["routes"]]),
                }
            )
            fairness.append([variant["label"], s, runs[-1]["jain"]])
        variants.append({"label": variant["label"], "runs": runs})

    report = {
        "schema": ANALYSIS_SCHEMA,
        "variants": variants,
        "lemma2_sweep": lemma2_sweep(lemma2_trials, seed=seed),
    }
    write_json(os.path.join(run_dir, "analysis.json"), report)
    print(tabulate(fairness, headers=["Variant", "Seed", "Jain"], tablefmt="github"))
    return report


def experiment(config=None, out_dir: str = "runs", preset: Optional[str] = None, **overrides):
    """Run every configured variant end to end, like ``dflroute simulate``."""
    config = load_config(config, overrides or None, preset=preset)
    return cmd_simulate(config, out_dir)
