"""Structured prefix channel pruning.

The simulator only needs the transmit indicator of a :class:`PruningPlan`.
:func:`prune_payload`, :func:`reconstruct`, :func:`encode_payload` and
:func:`decode_payload` are the library surface for putting a pruned model on
an actual wire: retained values in indicator order behind a fixed header.
"""
import math
import struct
from dataclasses import dataclass
from typing import Tuple

import numpy as np

# client id, round, eta, count
HEADER = struct.Struct("<IIdQ")
_FLOOR_EPS = 1e-12


class PruningError(ValueError):
    def __init__(self, layer: int, eta: float, channels: int):
        self.layer = layer
        super(PruningError, self).__init__(
            f"eta={eta!r} keeps no channel of layer {layer} ({channels} channels)"
        )


@dataclass(frozen=True)
class ModelSpec:
    """Channel counts of the prunable weight grids, ``delta_1 .. delta_{Z+1}``."""

    layer_channels: Tuple[int, ...]

    def __post_init__(self):
        channels = tuple(int(d) for d in self.layer_channels)
        if len(channels) < 2:
            raise ValueError("a model needs at least an input and an output channel count")
        if any(d < 1 for d in channels):
            raise ValueError(f"channel counts must be positive, got {channels}")
        object.__setattr__(self, "layer_channels", channels)

    @property
    def num_layers(self) -> int:
        return len(self.layer_channels) - 1

    @property
    def layer_param_count(self) -> Tuple[int, ...]:
        d = self.layer_channels
        return tuple(d[z] * d[z + 1] for z in range(self.num_layers))

    @property
    def total_params(self) -> int:
        return sum(self.layer_param_count)

    @property
    def layer_offsets(self) -> Tuple[int, ...]:
        return tuple(np.cumsum((0,) + self.layer_param_count).tolist())


@dataclass(frozen=True, eq=False)
class PruningPlan:
    spec: ModelSpec
    eta: float
    kept_channels: Tuple[int, ...]
    input_masks: Tuple[np.ndarray, ...]
    output_masks: Tuple[np.ndarray, ...]
    indicator: np.ndarray

    @property
    def retention(self) -> float:
        return self.eta ** 2

    @property
    def retained_count(self) -> int:
        k = self.kept_channels
        return sum(k[z] * k[z + 1] for z in range(len(k) - 1))

    @property
    def nominal_count(self) -> int:
        return int(math.floor(self.retention * self.spec.total_params + 1e-9))

    @property
    def retained_fraction(self) -> float:
        return self.retained_count / self.spec.total_params

    @property
    def positions(self) -> np.ndarray:
        return np.flatnonzero(self.indicator)


def eta_from_retention(retention: float) -> float:
    if not 0 < retention <= 1:
        raise ValueError(f"retention must lie in (0, 1], got {retention!r}")
    return math.sqrt(retention)


def build_plan(spec: ModelSpec, eta: float) -> PruningPlan:
    """Prefix channel masks for channel retention ratio ``eta``.

    Layer ``z`` keeps its first ``floor(eta * delta_z)`` channels; a weight is
    transmitted iff both its input and its output channel are kept. The
    indicator is flattened layer by layer, input-channel major.
    """
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta!r}")
    kept = []
    for z, channels in enumerate(spec.layer_channels):
        k = min(channels, int(math.floor(eta * channels + _FLOOR_EPS)))
        if k < 1:
            raise PruningError(z, eta, channels)
        kept.append(k)

    masks = [np.arange(d) < k for d, k in zip(spec.layer_channels, kept)]
    input_masks = tuple(masks[:-1])
    output_masks = tuple(masks[1:])
    indicator = np.concatenate([np.outer(g_in, g_out).ravel() for g_in, g_out in zip(input_masks, output_masks)])
    indicator.setflags(write=False)
    return PruningPlan(
        spec=spec,
        eta=float(eta),
        kept_channels=tuple(kept),
        input_masks=input_masks,
        output_masks=output_masks,
        indicator=indicator,
    )


def full_plan(spec: ModelSpec) -> PruningPlan:
    return build_plan(spec, 1.0)


def plan_for_retention(spec: ModelSpec, retention: float) -> PruningPlan:
    return build_plan(spec, eta_from_retention(retention))


def prune_payload(params, plan: PruningPlan) -> np.ndarray:
    values = np.asarray(params, dtype=np.float64).reshape(-1)
    if values.shape[0] != plan.spec.total_params:
        raise ValueError(f"model has {values.shape[0]} parameters, plan expects {plan.spec.total_params}")
    return values[plan.indicator]


def reconstruct(values, plan: PruningPlan, fill: float = 0.0) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.shape[0] != plan.retained_count:
        raise ValueError(f"payload has {values.shape[0]} values, plan retains {plan.retained_count}")
    out = np.full(plan.spec.total_params, fill, dtype=np.float64)
    out[plan.indicator] = values
    return out


def encode_payload(client: int, round: int, plan: PruningPlan, values) -> bytes:
    values = np.asarray(values, dtype="<f8").reshape(-1)
    if values.shape[0] != plan.retained_count:
        raise ValueError(f"payload has {values.shape[0]} values, plan retains {plan.retained_count}")
    return HEADER.pack(client, round, plan.eta, values.shape[0]) + values.tobytes()


def decode_payload(data: bytes, spec: ModelSpec):
    """Parse a wire payload; positions are rebuilt from ``(spec, eta)``.

    Returns ``(client, round, plan, values)``.
    """
    if len(data) < HEADER.size:
        raise ValueError("payload shorter than its header")
    client, round, eta, count = HEADER.unpack_from(data)
    body = data[HEADER.size :]
    if len(body) != 8 * count:
        raise ValueError(f"payload declares {count} values but carries {len(body)} bytes")
    plan = build_plan(spec, eta)
    if plan.retained_count != count:
        raise ValueError(f"eta={eta!r} retains {plan.retained_count} values, payload carries {count}")
    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return client, round, plan, values


def priority_order(plan: PruningPlan, mode: str = "layer") -> np.ndarray:
    """Retained positions in forwarding priority: earlier layers first, or the reverse."""
    positions = plan.positions
    if mode == "layer":
        return positions
    elif mode == "reverse":
        return positions[::-1].copy()
    raise ValueError(f"unknown parameter priority {mode!r}")


def floor_error_bound(spec: ModelSpec) -> int:
    d = spec.layer_channels
    return sum(d[z] + d[z + 1] for z in range(spec.num_layers))

