from typing import List

import torch
import torch.nn as nn

from dflroute.operators.pruning import ModelSpec


class BaseModel(nn.Module):
    """A stack of bias-free linear layers whose weight grids are the prunable channels.

    The flat parameter vector lists the layers in order; within a layer the
    ``in x out`` grid is flattened input-channel major, which matches the
    transmit indicator of :func:`dflroute.operators.build_plan`.
    """

    @staticmethod
    def add_args(parser):
        """Add model-specific arguments to the parser."""
        pass

    @classmethod
    def build_model_from_args(cls, args):
        """Build a new model instance."""
        raise NotImplementedError("Models must implement the build_model_from_args method")

    def forward(self, *args):
        raise NotImplementedError

    def weight_layers(self) -> List[nn.Linear]:
        raise NotImplementedError

    def model_spec(self) -> ModelSpec:
        layers = self.weight_layers()
        return ModelSpec(tuple([layers[0].in_features] + [layer.out_features for layer in layers]))

    @property
    def num_params(self) -> int:
        return sum(layer.weight.numel() for layer in self.weight_layers())

    def flat_parameters(self) -> torch.Tensor:
        return torch.cat([layer.weight.detach().t().reshape(-1) for layer in self.weight_layers()])

    def load_flat_parameters(self, flat: torch.Tensor):
        flat = torch.as_tensor(flat).reshape(-1)
        if flat.numel() != self.num_params:
            raise ValueError(f"expected {self.num_params} parameters, got {flat.numel()}")
        offset = 0
        with torch.no_grad():
            for layer in self.weight_layers():
                size = layer.weight.numel()
                grid = flat[offset : offset + size].reshape(layer.in_features, layer.out_features)
                layer.weight.copy_(grid.t())
                offset += size
        return self

    def flat_gradients(self) -> torch.Tensor:
        return torch.cat([layer.weight.grad.t().reshape(-1) for layer in self.weight_layers()])
