from typing import List, Sequence, Tuple

import numpy as np
import torch

from dflroute.utils import accuracy, cross_entropy_loss


class FederatedDataset(object):
    r"""Per-client training shards plus one shared test split.

    Args:
        client_data (list): ``(x, y)`` tensor pairs, one per client.
        test_data (tuple): ``(x, y)`` evaluated by every client.
        num_features (int): input dimension.
        num_classes (int): number of labels, 1 for regression.
    """

    @staticmethod
    def add_args(parser):
        """Add dataset-specific arguments to the parser."""
        pass

    def __init__(self, client_data: List[Tuple[torch.Tensor, torch.Tensor]], test_data, num_features, num_classes):
        if not client_data:
            raise ValueError("a federated dataset needs at least one client")
        for n, (x, y) in enumerate(client_data):
            if x.shape[0] == 0:
                raise ValueError(f"client {n} has an empty dataset")
            if x.shape[0] != y.shape[0]:
                raise ValueError(f"client {n} has {x.shape[0]} inputs but {y.shape[0]} targets")
        self.client_data = client_data
        self.test_data = test_data
        self.num_features = num_features
        self.num_classes = num_classes

    @property
    def num_clients(self) -> int:
        return len(self.client_data)

    @property
    def sizes(self) -> List[int]:
        return [int(x.shape[0]) for x, _ in self.client_data]

    def get_loss_fn(self):
        return cross_entropy_loss

    def get_evaluator(self):
        return accuracy

    def __len__(self):
        return self.num_clients

    def __getitem__(self, idx):
        return self.client_data[idx]


def shard_iid(num_samples: int, num_clients: int, rng: np.random.Generator) -> List[np.ndarray]:
    order = rng.permutation(num_samples)
    return [np.sort(part) for part in np.array_split(order, num_clients)]


def shard_dirichlet(labels: np.ndarray, num_clients: int, alpha: float, rng: np.random.Generator) -> List[np.ndarray]:
    """Label-skew split: each class is divided among clients by a Dirichlet(alpha) draw."""
    if not alpha > 0:
        raise ValueError(f"dirichlet alpha must be positive, got {alpha!r}")
    shards = [[] for _ in range(num_clients)]
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        proportions = rng.dirichlet(np.full(num_clients, alpha))
        cuts = (np.cumsum(proportions) * len(idx)).astype(int)[:-1]
        for n, part in enumerate(np.split(idx, cuts)):
            shards[n].extend(part.tolist())
    # every client keeps at least one sample
    for n in range(num_clients):
        if not shards[n]:
            donor = max(range(num_clients), key=lambda m: (len(shards[m]), -m))
            shards[n].append(shards[donor].pop())
    return [np.sort(np.asarray(s, dtype=np.int64)) for s in shards]


def split_clients(x: np.ndarray, y: np.ndarray, shards: Sequence[np.ndarray]):
    return [
        (torch.as_tensor(x[s], dtype=torch.float64), torch.as_tensor(y[s])) for s in shards
    ]
