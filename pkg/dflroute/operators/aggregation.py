from dataclasses import dataclass, field
from typing import Dict, Sequence

import torch


@dataclass
class ClientWeights:
    """Ideal aggregation weights ``p_n = D_n / sum(D)``."""

    p: torch.Tensor

    def __post_init__(self):
        self.p = torch.as_tensor(self.p, dtype=torch.float64).reshape(-1)
        if self.p.numel() == 0 or bool((self.p <= 0).any()):
            raise ValueError("client weights must be strictly positive")
        if abs(self.p.sum().item() - 1.0) > 1e-12:
            raise ValueError(f"client weights sum to {self.p.sum().item()!r}, expected 1")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]):
        sizes = torch.as_tensor(sizes, dtype=torch.float64)
        if bool((sizes <= 0).any()):
            raise ValueError("every client needs at least one sample")
        return cls(sizes / sizes.sum())

    @property
    def p_max(self) -> float:
        return self.p.max().item()

    def __len__(self):
        return self.p.numel()


@dataclass
class ReceivedSet:
    """Models and transmit indicators that reached ``receiver`` in one round.

    Senders absent from ``models`` did not deliver and count as all-zero
    indicator rows.
    """

    receiver: int
    models: Dict[int, torch.Tensor] = field(default_factory=dict)
    indicators: Dict[int, torch.Tensor] = field(default_factory=dict)

    def dense(self, num_clients: int):
        if self.receiver not in self.models:
            raise ValueError(f"receiver {self.receiver} is missing its own model")
        size = torch.as_tensor(self.models[self.receiver]).numel()
        models = torch.zeros(num_clients, size, dtype=torch.float64)
        indicators = torch.zeros(num_clients, size, dtype=torch.float64)
        for m, model in self.models.items():
            model = torch.as_tensor(model, dtype=torch.float64).reshape(-1)
            if model.numel() != size:
                raise ValueError(f"sender {m} has {model.numel()} parameters, expected {size}")
            models[m] = model
            e = self.indicators.get(m)
            indicators[m] = 1.0 if e is None else torch.as_tensor(e, dtype=torch.float64).reshape(-1)
        return models, indicators


def _check_self(receiver, indicators):
    if not bool((indicators[receiver] == 1).all()):
        raise ValueError(f"receiver {receiver} must hold its full own model")


def coefficients_dense(receiver: int, indicators: torch.Tensor, weights: ClientWeights) -> torch.Tensor:
    """Per-element aggregation coefficients ``p e / sum(p e)``, one row per sender."""
    _check_self(receiver, indicators)
    p = weights.p
    scaled = p.unsqueeze(1) * indicators.to(torch.float64)
    den = torch.zeros(indicators.shape[1], dtype=torch.float64)
    for m in range(scaled.shape[0]):
        den += scaled[m]
    return scaled / den


def aggregate_dense(receiver: int, models: torch.Tensor, indicators: torch.Tensor, weights: ClientWeights):
    _check_self(receiver, indicators)
    p = weights.p
    num = torch.zeros(models.shape[1], dtype=torch.float64)
    den = torch.zeros(models.shape[1], dtype=torch.float64)
    for m in range(models.shape[0]):
        w = p[m] * indicators[m].to(torch.float64)
        num += w * models[m]
        den += w
    return num / den


def local_aggregate(received: ReceivedSet, weights: ClientWeights) -> torch.Tensor:
    models, indicators = received.dense(len(weights))
    return aggregate_dense(received.receiver, models, indicators, weights)


def lambda_coeffs(received: ReceivedSet, weights: ClientWeights) -> torch.Tensor:
    """Realized minus ideal coefficient for every (sender, element); columns sum to zero."""
    _, indicators = received.dense(len(weights))
    return lambda_coeffs_dense(received.receiver, indicators, weights)


def lambda_coeffs_dense(receiver: int, indicators: torch.Tensor, weights: ClientWeights) -> torch.Tensor:
    return coefficients_dense(receiver, indicators, weights) - weights.p.unsqueeze(1)


def _stack(models) -> torch.Tensor:
    if isinstance(models, (list, tuple)):
        return torch.stack([torch.as_tensor(m, dtype=torch.float64).reshape(-1) for m in models])
    return torch.as_tensor(models, dtype=torch.float64)


def ideal_global(models, weights: ClientWeights) -> torch.Tensor:
    models = _stack(models)
    if models.dim() != 2 or models.shape[0] != len(weights):
        raise ValueError(f"expected {len(weights)} models, got shape {tuple(models.shape)}")
    out = torch.zeros(models.shape[1], dtype=torch.float64)
    for n in range(models.shape[0]):
        out += weights.p[n] * models[n]
    return out


def bias_norm_sum(local_models, global_model) -> float:
    local_models = _stack(local_models)
    global_model = torch.as_tensor(global_model, dtype=torch.float64).reshape(1, -1)
    if local_models.shape[-1] != global_model.shape[-1]:
        raise ValueError("local and global models differ in length")
    return torch.sum((local_models - global_model) ** 2).item()
