import importlib

from .base_router import BaseRouter, RoutingConfig
from .cost import hop_breakdown, node_priority, tree_cost


ROUTER_REGISTRY = {}


def normalize_scheme(name: str) -> str:
    return name.strip().lower().replace("-", "_")


def register_router(name):
    """
    New routing schemes can be added to dflroute with the :func:`register_router`
    function decorator.

    For example::

        @register_router('kruskal')
        class KruskalRouter(BaseRouter):
            (...)

    Args:
        name (str): the name of the routing scheme
    """

    def register_router_cls(cls):
        if name in ROUTER_REGISTRY:
            raise ValueError("Cannot register duplicate router ({})".format(name))
        if not issubclass(cls, BaseRouter):
            raise ValueError("Router ({}: {}) must extend BaseRouter".format(name, cls.__name__))
        ROUTER_REGISTRY[name] = cls
        cls.router_name = name
        return cls

    return register_router_cls


def try_import_router(scheme):
    scheme = normalize_scheme(scheme)
    if scheme not in ROUTER_REGISTRY:
        if scheme in SUPPORTED_ROUTERS:
            importlib.import_module(SUPPORTED_ROUTERS[scheme])
        else:
            return False
    return True


def build_router(args):
    if not try_import_router(args.scheme):
        raise KeyError(f"Unknown routing scheme ({args.scheme})")
    return ROUTER_REGISTRY[normalize_scheme(args.scheme)].build_router_from_args(args)


SUPPORTED_ROUTERS = {
    "kruskal": "dflroute.routing.kruskal",
    "bellman": "dflroute.routing.bellman",
    "flood": "dflroute.routing.flood",
    "p_clt": "dflroute.routing.p_clt",
    "np_clt": "dflroute.routing.p_clt",
    "p_nclt": "dflroute.routing.p_clt",
    "np_nclt": "dflroute.routing.p_clt",
    "cond18_only": "dflroute.routing.p_clt",
    "cond19_only": "dflroute.routing.p_clt",
}

P_CLT_FAMILY = ("p_clt", "np_clt", "p_nclt", "np_nclt", "cond18_only", "cond19_only")

from .kruskal import kruskal_tree  # noqa: E402
from .bellman import bellman_distances, bellman_spt  # noqa: E402
from .flood import flood_tree  # noqa: E402
from .p_clt import modify_links, p_clt, p_clt_stages  # noqa: E402
from .tuning import THETA_GRID, tune_theta  # noqa: E402
from .enhanced import (  # noqa: E402
    BottleneckConfig,
    CamDecision,
    DeliveryResult,
    cam_adjust,
    demoted_tree,
    fpsr_schedule,
    simulate_deliveries,
)
