import json
import os

from dflroute import options
from dflroute.data import Topology


def write_config(tmp_path, config):
    path = str(tmp_path / "config.json")
    with open(path, "w") as f:
        json.dump(config, f)
    return path


def test_parser():
    parser = options.get_parser()
    args = parser.parse_args(["route", "--scheme", "p_clt", "kruskal", "--seed-override", "4", "--theta-sweep"])
    assert args.command == "route"
    assert args.scheme == ["p_clt", "kruskal"]
    assert args.theta_sweep and not args.psi_sweep
    assert args.sweep_bandwidth is None

    args = parser.parse_args(["analyze", "runs", "--tau-rho", "1.0"])
    assert args.run_dir == "runs"
    assert args.lemma2_trials == 1000
    assert args.tau_rho == [1.0]


def test_config_overrides():
    parser = options.get_parser()
    args = parser.parse_args(["simulate", "--seed-override", "4", "--policy", "none"])
    assert options.config_overrides(args) == {"seeds": [4], "pruning": {"policy": ["none"]}}
    args = parser.parse_args(["simulate"])
    assert options.config_overrides(args) == {}


def test_out_dir(monkeypatch):
    parser = options.get_parser()
    monkeypatch.delenv(options.OUT_DIR_ENV, raising=False)
    assert options.out_dir(parser.parse_args(["simulate"])) == "runs"
    monkeypatch.setenv(options.OUT_DIR_ENV, "/tmp/elsewhere")
    assert options.out_dir(parser.parse_args(["simulate"])) == "/tmp/elsewhere"
    assert options.out_dir(parser.parse_args(["simulate", "--out", "mine"])) == "mine"


def test_exit_codes(tmp_path):
    assert options.main(["--bogus"]) == options.EXIT_CONFIG
    assert options.main([]) == options.EXIT_CONFIG
    assert options.main(["simulate", "--preset", "nope"]) == options.EXIT_CONFIG
    assert options.main(["route", "--config", str(tmp_path / "missing.json")]) == options.EXIT_CONFIG
    bad = write_config(tmp_path, {"topology": {"n": 1}})
    assert options.main(["gen-topology", "--config", bad, "--out", str(tmp_path)]) == options.EXIT_CONFIG
    assert options.main(["analyze", str(tmp_path / "nowhere")]) == options.EXIT_RUNTIME


def test_gen_topology(tmp_path, monkeypatch):
    config = write_config(tmp_path, {"topology": {"n": 8, "seed": 3}})
    out = str(tmp_path / "out")
    assert options.main(["gen-topology", "--config", config, "--out", out]) == options.EXIT_OK
    assert Topology.load(os.path.join(out, "topology.json")).n == 8
    assert os.path.exists(os.path.join(out, "schedule.json"))

    env_out = str(tmp_path / "env")
    monkeypatch.setenv(options.OUT_DIR_ENV, env_out)
    assert options.main(["gen-topology", "--config", config]) == options.EXIT_OK
    assert os.path.exists(os.path.join(env_out, "topology.json"))


def test_route_command(tmp_path):
    config = write_config(tmp_path, {"topology": {"n": 6}})
    out = str(tmp_path / "route")
    assert options.main(["route", "--config", config, "--out", out, "--scheme", "flood", "bellman"]) == 0
    with open(os.path.join(out, "routes.json")) as f:
        assert sorted(json.load(f)["schemes"]) == ["bellman", "flood"]


if __name__ == "__main__":
    test_parser()
    test_config_overrides()
