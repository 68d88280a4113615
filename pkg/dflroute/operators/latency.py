import math
from dataclasses import dataclass
from typing import Optional, Tuple

from dflroute.data import BroadcastTree, Topology


@dataclass(frozen=True)
class LatencyBudget:
    """Per-round time budget ``t_max = slot_s * frames`` of one client's TDMA slots."""

    t_max_s: float
    slot_s: Optional[float] = None
    frames: int = 1

    def __post_init__(self):
        if not self.t_max_s > 0:
            raise ValueError(f"t_max_s must be positive, got {self.t_max_s!r}")
        if self.frames < 1:
            raise ValueError(f"frames must be a positive integer, got {self.frames!r}")
        if self.slot_s is None:
            object.__setattr__(self, "slot_s", self.t_max_s / self.frames)
        if not self.slot_s > 0:
            raise ValueError(f"slot_s must be positive, got {self.slot_s!r}")
        if not math.isclose(self.slot_s * self.frames, self.t_max_s, rel_tol=1e-12):
            raise ValueError(f"slot_s * frames = {self.slot_s * self.frames!r} differs from t_max_s = {self.t_max_s!r}")

    @classmethod
    def build_from_args(cls, args):
        return cls(args.t_max_s, getattr(args, "slot_s", None), getattr(args, "frames", 1))


def bottleneck_rate(tree: BroadcastTree, topology: Topology, i: int) -> float:
    """Rate of the slowest link in transmitter ``i``'s broadcast group."""
    group = tree.group(i)
    if not group:
        raise ValueError(f"node {i} is not a transmitter of the tree rooted at {tree.root}")
    return min(topology.rate(i, j) for j in group)


def hop_latency(payload_bits: int, rate: float) -> float:
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    if payload_bits < 0:
        raise ValueError(f"payload_bits must be non-negative, got {payload_bits!r}")
    return payload_bits / rate


def total_latency(tree: BroadcastTree, topology: Topology, payload_bits: int) -> float:
    return math.fsum(hop_latency(payload_bits, bottleneck_rate(tree, topology, i)) for i in tree.transmitters)


def optimal_retention(cost: float, k_params: int, bits_per_param: int, t_max_s: float) -> Tuple[float, bool]:
    """Largest retention rate whose payload meets the deadline.

    Returns ``(r, feasible)`` with ``r = min(1, t_max / (K * bits * C))``.
    ``feasible`` is False when a single parameter already misses the deadline.
    """
    if cost < 0 or not math.isfinite(cost):
        raise ValueError(f"tree cost must be finite and non-negative, got {cost!r}")
    if k_params < 1 or bits_per_param < 1:
        raise ValueError("k_params and bits_per_param must be positive")
    if not t_max_s > 0:
        raise ValueError(f"t_max_s must be positive, got {t_max_s!r}")
    if cost == 0:
        return 1.0, True
    retention = min(1.0, t_max_s / (k_params * bits_per_param * cost))
    return retention, bits_per_param * cost <= t_max_s


def payload_bits(retention: float, k_params: int, bits_per_param: int) -> int:
    """Nominal payload ``floor(r * K) * bits``."""
    return int(math.floor(retention * k_params + 1e-9)) * bits_per_param


def wire_payload_bits(retained: int, k_params: int, wire_params: Optional[int], bits_per_param: int) -> int:
    """Bits on the wire for ``retained`` of ``k_params`` weights, scaled to a ``wire_params`` model."""
    if wire_params is None:
        return retained * bits_per_param
    return (retained * int(wire_params)) // k_params * bits_per_param
