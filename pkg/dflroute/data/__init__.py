from .topology import (
    TOPOLOGY_SCHEMA,
    RadioParams,
    Topology,
    channel_gain_sq,
    dbm_to_watt,
    generate_rgg,
    link_rate,
    shannon_rate,
    snr,
    target_edge_count,
)
from .tree import BroadcastTree

__all__ = [
    "TOPOLOGY_SCHEMA",
    "RadioParams",
    "Topology",
    "BroadcastTree",
    "channel_gain_sq",
    "dbm_to_watt",
    "generate_rgg",
    "link_rate",
    "shannon_rate",
    "snr",
    "target_edge_count",
]

from .dataset import FederatedDataset, shard_dirichlet, shard_iid, split_clients  # noqa: E402

__all__ += ["FederatedDataset", "shard_dirichlet", "shard_iid", "split_clients"]
