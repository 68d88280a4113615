import copy
import json
import os
from typing import Dict, List, Optional, Union

import yaml

from dflroute.routing import SUPPORTED_ROUTERS, normalize_scheme
from dflroute.utils import build_args_from_dict

CONFIG_SCHEMA = "dflroute.config/1"

DEFAULT_CONFIG = {
    "topology": {"n": 20, "density": 0.6, "area_km": 1.0, "seed": 0},
    "radio": {
        "carrier_freq_hz": 2.5e9,
        "bandwidth_hz": 30e6,
        "tx_power_dbm": 20.0,
        "noise_psd_dbm_per_hz": -174.0,
        "propagation_const": 3e8,
    },
    "budget": {"t_max_s": 2.0, "slot_s": None, "frames": 1, "bits_per_param": 32, "wire_params": 11690000},
    "routing": {
        "scheme": "p_clt",
        "theta": 0.1,
        "iterations": 3,
        "theta_scale": "max",
        "priority_mode": "children",
        "tune_theta": False,
    },
    "pruning": {"policy": "optimal", "fixed_retention": [0.6, 0.85, 0.95]},
    "task": {
        "kind": "softmax_mlp",
        "samples_per_client": 64,
        "test_samples": 512,
        "features": 16,
        "classes": 4,
        "outputs": 4,
        "hidden_size": 32,
        "batch_size": 16,
        "lr": 0.05,
        "local_epochs": 1,
        "regularizer": 0.0,
        "noise": 0.1,
        "heterogeneity": 0.5,
        "separation": 1.0,
        "dirichlet_alpha": None,
    },
    "trainer": "dfl",
    "rounds": 200,
    "seeds": [1],
    "workers": 1,
    "record_trajectory": True,
    "bottleneck": None,
}

BOTTLENECK_DEFAULTS = {
    "bw_limited": {"0": 0.8, "17": 0.8},
    "fwd_limited": {"2": 6, "5": 6, "16": 6},
    "param_priority": "layer",
    "segments": 4,
    "cam": True,
    "reroute": True,
}

PRESETS = {
    "bottleneck": {"bottleneck": BOTTLENECK_DEFAULTS},
    "lemma1": {
        "topology": {"n": 5},
        "task": {"kind": "ridge_regression", "batch_size": 64, "regularizer": 0.1, "lr": 0.01},
        "rounds": 50,
    },
}

# keys that may be null, with the type they take otherwise
NULLABLE = {
    "budget.slot_s": float,
    "budget.wire_params": int,
    "task.dirichlet_alpha": float,
}
FREE_FORM = ("bottleneck.bw_limited", "bottleneck.fwd_limited")
NAME_OR_LIST = ("routing.scheme", "pruning.policy")

POLICY_ALIASES = {"no_pruning": "none", "nopruning": "none", "fixed_retention": "fixed", "opt": "optimal"}
TRAINERS = ("dfl", "p2p")
TASKS = ("ridge_regression", "softmax_mlp")


class ConfigError(ValueError):
    pass


def normalize_policy(name: str) -> str:
    name = name.strip().lower().replace("-", "_")
    return POLICY_ALIASES.get(name, name)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_value(path: str, default, value):
    if path in NAME_OR_LIST:
        names = [value] if isinstance(value, str) else value
        if not isinstance(names, list) or not names or not all(isinstance(x, str) for x in names):
            raise ConfigError(f"{path} must be a name or a non-empty list of names, got {value!r}")
        return names
    if path in NULLABLE and value is None:
        return None
    kind = NULLABLE.get(path, type(default))
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path} must be a boolean, got {value!r}")
    elif kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path} must be an integer, got {value!r}")
    elif kind is float:
        if not _is_number(value):
            raise ConfigError(f"{path} must be a number, got {value!r}")
        value = float(value)
    elif kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}")
    elif kind is list:
        if not isinstance(value, list) or not all(_is_number(x) for x in value):
            raise ConfigError(f"{path} must be a list of numbers, got {value!r}")
    return value


def _merge(base: Dict, override: Dict, prefix: str = "") -> Dict:
    if not isinstance(override, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'} must be an object, got {override!r}")
    out = copy.deepcopy(base)
    for key, value in override.items():
        path = prefix + key
        if path == "schema":
            continue
        if key not in base:
            raise ConfigError(f"unknown config key {path!r}")
        default = base[key]
        if path == "bottleneck":
            if value is None:
                out[key] = None
            else:
                out[key] = _merge(default or BOTTLENECK_DEFAULTS, value, "bottleneck.")
        elif path in FREE_FORM:
            if not isinstance(value, dict) or not all(_is_number(v) for v in value.values()):
                raise ConfigError(f"{path} must map client ids to numbers, got {value!r}")
            out[key] = {str(k): v for k, v in value.items()}
        elif isinstance(default, dict):
            out[key] = _merge(default, value, path + ".")
        else:
            out[key] = _check_value(path, default, value)
    return out


def _load_match():
    match_path = os.path.join(os.path.dirname(os.path.realpath(__file__)), "match.yml")
    with open(match_path, "r", encoding="utf8") as f:
        return yaml.safe_load(f)


def check_match(trainer: str, task: str, schemes: List[str], policies: List[str]):
    """Reject (trainer, task, scheme, policy) combinations absent from ``match.yml``."""
    entries = _load_match().get(trainer)
    if entries is None:
        raise ConfigError(f"unknown trainer {trainer!r}")
    for scheme in schemes:
        for policy in policies:
            ok = any(
                task in item["task"]
                and policy in item["policy"]
                and ("scheme" not in item or scheme in item["scheme"])
                for item in entries
            )
            if not ok:
                raise ConfigError(f"({trainer}, {task}, {scheme}, {policy}) is not a supported combination")


def _validate(config: Dict):
    topo = config["topology"]
    if topo["n"] < 2:
        raise ConfigError(f"topology.n must be at least 2, got {topo['n']}")
    if not 0 < topo["density"] <= 1:
        raise ConfigError(f"topology.density must lie in (0, 1], got {topo['density']}")
    if config["rounds"] < 0:
        raise ConfigError(f"rounds must be non-negative, got {config['rounds']}")
    if config["workers"] < 1:
        raise ConfigError(f"workers must be positive, got {config['workers']}")
    seeds = config["seeds"]
    if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        raise ConfigError(f"seeds must be a non-empty list of integers, got {seeds!r}")
    if config["trainer"] not in TRAINERS:
        raise ConfigError(f"unknown trainer {config['trainer']!r}")
    if config["task"]["kind"] not in TASKS:
        raise ConfigError(f"unknown task kind {config['task']['kind']!r}")
    for r in config["pruning"]["fixed_retention"]:
        if not 0 < r <= 1:
            raise ConfigError(f"fixed retention must lie in (0, 1], got {r}")

    routing, pruning = config["routing"], config["pruning"]
    routing["scheme"] = [normalize_scheme(s) for s in routing["scheme"]]
    pruning["policy"] = [normalize_policy(p) for p in pruning["policy"]]
    for scheme in routing["scheme"]:
        if scheme not in SUPPORTED_ROUTERS:
            raise ConfigError(f"unknown routing scheme {scheme!r}")
    if "fixed" in pruning["policy"] and not pruning["fixed_retention"]:
        raise ConfigError("the fixed policy needs at least one pruning.fixed_retention value")
    bottleneck = config["bottleneck"]
    if bottleneck is not None:
        if config["trainer"] != "dfl":
            raise ConfigError("bottleneck scenarios need the dfl trainer")
        for key in FREE_FORM:
            for node in bottleneck[key.split(".")[1]]:
                if not node.isdigit() or int(node) >= topo["n"]:
                    raise ConfigError(f"{key} names client {node!r}, outside 0..{topo['n'] - 1}")
        if bottleneck["param_priority"] not in ("layer", "reverse"):
            raise ConfigError(f"unknown bottleneck.param_priority {bottleneck['param_priority']!r}")
    check_match(config["trainer"], config["task"]["kind"], routing["scheme"], pruning["policy"])


def load_config(
    source: Union[str, Dict, None] = None, overrides: Optional[Dict] = None, preset: Optional[str] = None
) -> Dict:
    """Defaults, then ``preset``, then the JSON document or dict ``source``, then ``overrides``."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    layers = []
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        layers.append(PRESETS[preset])
    if isinstance(source, str):
        try:
            with open(source, "r", encoding="utf8") as f:
                layers.append(json.load(f))
        except OSError as e:
            raise ConfigError(f"cannot read config {source!r}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {source!r} is not valid JSON: {e}")
    elif source is not None:
        layers.append(source)
    if overrides:
        layers.append(overrides)
    for layer in layers:
        config = _merge(config, layer)
    for path in NAME_OR_LIST:
        block, key = path.split(".")
        config[block][key] = _check_value(path, None, config[block][key])
    _validate(config)
    return config


def config_to_args(config: Dict, scheme: str, policy: str, retention: Optional[float], seed: int, num_clients: int):
    """Flatten one experiment variant into the namespace routers, tasks and trainers are built from."""
    task = config["task"]
    routing = config["routing"]
    budget = config["budget"]
    args = {
        "task": task["kind"],
        "dataset": None,
        "model": None,
        "trainer": config["trainer"],
        "seed": seed,
        "num_clients": num_clients,
        "scheme": scheme,
        "theta": routing["theta"],
        "iterations": routing["iterations"],
        "theta_scale": routing["theta_scale"],
        "priority_mode": routing["priority_mode"],
        "policy": policy,
        "retention": retention,
        "rounds": config["rounds"],
        "t_max_s": budget["t_max_s"],
        "slot_s": budget["slot_s"],
        "frames": budget["frames"],
        "bits_per_param": budget["bits_per_param"],
        "wire_params": budget["wire_params"],
        "bottleneck": config["bottleneck"],
        "record_trajectory": config["record_trajectory"],
        "progress": config["workers"] == 1,
        "num_layers": 2,
        "dropout": 0.0,
    }
    for key in (
        "samples_per_client",
        "test_samples",
        "features",
        "classes",
        "outputs",
        "hidden_size",
        "batch_size",
        "lr",
        "local_epochs",
        "regularizer",
        "noise",
        "heterogeneity",
        "separation",
        "dirichlet_alpha",
    ):
        args[key] = task[key]
    return build_args_from_dict(args)
