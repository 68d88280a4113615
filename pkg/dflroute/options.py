import argparse
import logging
import os
import sys

from dflroute import experiments
from dflroute.configs import PRESETS, ConfigError, load_config
from dflroute.utils import set_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
OUT_DIR_ENV = "DFLROUTE_OUT_DIR"


def get_common_parser():
    parser = argparse.ArgumentParser(add_help=False)
    # fmt: off
    parser.add_argument("--config", type=str, default=None, metavar="PATH",
                        help="JSON experiment config merged over the defaults")
    parser.add_argument("--preset", type=str, default=None, choices=sorted(PRESETS),
                        help="named scenario applied before --config")
    parser.add_argument("--out", type=str, default=None, metavar="DIR",
                        help=f"output directory (default ${OUT_DIR_ENV} or ./runs)")
    parser.add_argument("--seed-override", type=int, default=None, metavar="INT",
                        help="replace the configured seed list")
    parser.add_argument("--scheme", type=str, nargs="+", default=None, metavar="NAME")
    parser.add_argument("--policy", type=str, nargs="+", default=None, metavar="NAME")
    parser.add_argument("--log-level", type=str, default="INFO")
    # fmt: on
    return parser


def get_parser():
    common = get_common_parser()
    parser = argparse.ArgumentParser(prog="dflroute", conflict_handler="resolve")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    subparsers.add_parser("gen-topology", parents=[common], help="generate and save a random topology")

    route = subparsers.add_parser("route", parents=[common], help="per-root broadcast trees and latencies")
    # fmt: off
    route.add_argument("--topology", type=str, default=None, metavar="PATH")
    route.add_argument("--theta-sweep", action="store_true")
    route.add_argument("--psi-sweep", action="store_true")
    route.add_argument("--sweep-bandwidth", type=float, nargs="*", default=None, metavar="HZ")
    route.add_argument("--sweep-tmax", type=float, nargs="*", default=None, metavar="S")
    # fmt: on

    simulate = subparsers.add_parser("simulate", parents=[common], help="run the D-FL experiment variants")
    simulate.add_argument("--topology", type=str, default=None, metavar="PATH")

    analyze = subparsers.add_parser("analyze", parents=[common], help="check the bounds on a finished run")
    # fmt: off
    analyze.add_argument("run_dir", type=str)
    analyze.add_argument("--lemma2-trials", type=int, default=1000)
    analyze.add_argument("--tau-rho", type=float, nargs="+", default=[0.1, 1.0, 10.0])
    # fmt: on
    return parser


def config_overrides(args):
    overrides = {}
    if args.seed_override is not None:
        overrides["seeds"] = [args.seed_override]
    if args.scheme:
        overrides["routing"] = {"scheme": args.scheme}
    if args.policy:
        overrides["pruning"] = {"policy": args.policy}
    return overrides


def out_dir(args) -> str:
    return args.out or os.environ.get(OUT_DIR_ENV) or "runs"


def run(args) -> int:
    if args.command == "analyze":
        experiments.cmd_analyze(args.run_dir, lemma2_trials=args.lemma2_trials, taus=args.tau_rho)
        return EXIT_OK

    config = load_config(args.config, config_overrides(args), preset=args.preset)
    if args.command == "gen-topology":
        experiments.cmd_gen_topology(config, out_dir(args))
    elif args.command == "route":
        experiments.cmd_route(
            config,
            out_dir(args),
            topology_path=args.topology,
            with_theta_sweep=args.theta_sweep,
            with_psi_sweep=args.psi_sweep,
            bandwidths=args.sweep_bandwidth,
            t_maxes=args.sweep_tmax,
        )
    elif args.command == "simulate":
        experiments.cmd_simulate(config, out_dir(args), topology_path=args.topology)
    return EXIT_OK


def main(argv=None) -> int:
    parser = get_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG

    set_logger(getattr(logging, args.log_level.upper(), logging.INFO))
    try:
        return run(args)
    except ConfigError as e:
        logger.error("config error: %s", e)
        return EXIT_CONFIG
    except Exception as e:
        logger.error("%s: %s", type(e).__name__, e)
        logger.debug("traceback", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
