import argparse
import math
from abc import ABC
from typing import Optional, Tuple

import torch

from dflroute.datasets import build_dataset
from dflroute.models import build_model
from dflroute.operators import ClientWeights
from dflroute.trainers import build_trainer
from dflroute.trainers.base_trainer import NonFiniteError
from dflroute.utils import derive_seed


class BaseTask(ABC):
    """A federated learning problem: sharded data, a model layout and plain SGD.

    Models are exchanged as flat float64 vectors (see
    :meth:`dflroute.models.BaseModel.flat_parameters`); the task loads a
    vector into its scratch model to compute losses and gradients.
    """

    default_dataset = None
    default_model = None

    @staticmethod
    def add_args(parser: argparse.ArgumentParser):
        """Add task-specific arguments to the parser."""
        # fmt: off
        parser.add_argument("--lr", type=float, default=0.05)
        parser.add_argument("--batch-size", type=int, default=16)
        parser.add_argument("--local-epochs", type=int, default=1)
        parser.add_argument("--regularizer", type=float, default=0.0)
        # fmt: on

    def __init__(self, args, dataset=None, model=None):
        super(BaseTask, self).__init__()
        self.args = args
        if getattr(args, "dataset", None) is None:
            args.dataset = self.default_dataset
        if getattr(args, "model", None) is None:
            args.model = self.default_model

        self.dataset = build_dataset(args) if dataset is None else dataset
        args.num_features = self.dataset.num_features
        args.num_classes = self.dataset.num_classes
        self.model = (build_model(args) if model is None else model).double()
        self.loss_fn = self.dataset.get_loss_fn()
        self.evaluator = self.dataset.get_evaluator()

        self.lr = args.lr
        self.batch_size = args.batch_size
        self.local_epochs = args.local_epochs
        self.regularizer = getattr(args, "regularizer", 0.0)
        if self.lr <= 0 or self.batch_size < 1 or self.local_epochs < 1 or self.regularizer < 0:
            raise ValueError("lr and batch_size and local_epochs must be positive and regularizer non-negative")

        self.spec = self.model.model_spec()
        self.weights = ClientWeights.from_sizes(self.dataset.sizes)
        self.trainer = build_trainer(args) if getattr(args, "trainer", None) is not None else None

    @property
    def num_clients(self) -> int:
        return self.dataset.num_clients

    @property
    def full_batch(self) -> bool:
        return self.local_epochs == 1 and self.batch_size >= max(self.dataset.sizes)

    def initial_params(self, seed: int) -> torch.Tensor:
        """Shared starting model: uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per weight grid."""
        generator = torch.Generator().manual_seed(derive_seed(seed, "init"))
        with torch.no_grad():
            for layer in self.model.weight_layers():
                bound = 1.0 / math.sqrt(layer.in_features)
                layer.weight.uniform_(-bound, bound, generator=generator)
        return self.model.flat_parameters().clone()

    def objective(self, x, y) -> torch.Tensor:
        loss = self.loss_fn(self.model(x), y)
        if self.regularizer > 0:
            loss = loss + 0.5 * self.regularizer * sum(torch.sum(p ** 2) for p in self.model.parameters())
        return loss

    def client_loss(self, params: torch.Tensor, client: int, index: Optional[torch.Tensor] = None) -> torch.Tensor:
        x, y = self.dataset.client_data[client]
        if index is not None:
            x, y = x[index], y[index]
        self.model.load_flat_parameters(params)
        return self.objective(x, y)

    def gradient(self, params: torch.Tensor, client: int, index: Optional[torch.Tensor] = None) -> torch.Tensor:
        self.model.zero_grad()
        loss = self.client_loss(params, client, index)
        loss.backward()
        return self.model.flat_gradients().clone()

    def local_update(self, params: torch.Tensor, client: int, generator: torch.Generator, round: int = 0):
        """``local_epochs`` passes of mini-batch SGD starting from ``params``; returns the new flat model."""
        self.model.train()
        self.model.load_flat_parameters(params)
        optimizer = torch.optim.SGD(self.model.parameters(), lr=self.lr)
        x, y = self.dataset.client_data[client]
        num_samples = x.shape[0]
        for _ in range(self.local_epochs):
            perm = torch.randperm(num_samples, generator=generator)
            for start in range(0, num_samples, self.batch_size):
                index = perm[start : start + self.batch_size]
                optimizer.zero_grad()
                loss = self.objective(x[index], y[index])
                if not torch.isfinite(loss):
                    raise NonFiniteError(client, round, "loss")
                loss.backward()
                if not torch.isfinite(self.model.flat_gradients()).all():
                    raise NonFiniteError(client, round, "gradient")
                optimizer.step()
        return self.model.flat_parameters().clone()

    def evaluate(self, params: torch.Tensor) -> Tuple[float, float]:
        """Loss and metric of ``params`` on the shared test split."""
        self.model.eval()
        self.model.load_flat_parameters(params)
        x, y = self.dataset.test_data
        with torch.no_grad():
            pred = self.model(x)
            loss = self.loss_fn(pred, y).item()
            metric = self.evaluator(pred, y)
        return loss, metric

    def train(self, topology):
        if self.trainer is None:
            raise ValueError("no trainer configured for this task")
        return self.trainer.fit(self, topology)
