import numpy as np
import pytest
import torch

from dflroute.data import FederatedDataset, shard_dirichlet, shard_iid, split_clients
from dflroute.datasets import build_dataset
from dflroute.datasets.synthetic import GaussianMixture, GaussianRegression
from dflroute.utils import build_args_from_dict


def test_shard_iid():
    shards = shard_iid(10, 3, np.random.default_rng(0))
    assert [len(s) for s in shards] == [4, 3, 3]
    assert sorted(np.concatenate(shards).tolist()) == list(range(10))


def test_shard_dirichlet():
    labels = np.arange(100) % 4
    for alpha in (0.1, 1.0, 100.0):
        shards = shard_dirichlet(labels, 5, alpha, np.random.default_rng(1))
        assert len(shards) == 5
        assert all(len(s) > 0 for s in shards)
        assert sorted(np.concatenate(shards).tolist()) == list(range(100))
    with pytest.raises(ValueError):
        shard_dirichlet(labels, 5, 0.0, np.random.default_rng(1))


def test_federated_dataset_validation():
    x = torch.zeros(4, 2, dtype=torch.float64)
    with pytest.raises(ValueError):
        FederatedDataset([], (x, x), 2, 1)
    with pytest.raises(ValueError):
        FederatedDataset([(x, torch.zeros(3))], (x, x), 2, 1)
    with pytest.raises(ValueError):
        FederatedDataset([(x[:0], torch.zeros(0))], (x, x), 2, 1)

    x = np.arange(12, dtype=np.float64).reshape(6, 2)
    y = np.arange(6)
    dataset = FederatedDataset(split_clients(x, y, [np.array([0, 1]), np.array([2, 3, 4, 5])]), (x, y), 2, 6)
    assert dataset.num_clients == 2
    assert dataset.sizes == [2, 4]
    assert len(dataset) == 2
    assert dataset[1][0].dtype == torch.float64


def test_gaussian_regression():
    dataset = GaussianRegression(3, 10, 20, 4, outputs=2, seed=0)
    assert dataset.sizes == [10, 10, 10]
    assert dataset.num_features == 4
    assert dataset.num_classes == 2
    assert tuple(dataset.test_data[0].shape) == (20, 4)
    assert tuple(dataset.test_data[1].shape) == (20, 2)
    assert tuple(dataset.w_true.shape) == (4, 2)
    again = GaussianRegression(3, 10, 20, 4, outputs=2, seed=0)
    assert torch.equal(dataset.client_data[2][1], again.client_data[2][1])


def test_gaussian_mixture():
    args = build_args_from_dict(
        {
            "dataset": "gaussian_mixture",
            "num_clients": 4,
            "samples_per_client": 32,
            "test_samples": 64,
            "features": 8,
            "classes": 3,
            "separation": 2.0,
            "dirichlet_alpha": 0.5,
            "seed": 3,
        }
    )
    dataset = build_dataset(args)
    assert isinstance(dataset, GaussianMixture)
    assert dataset.num_clients == 4
    assert sum(dataset.sizes) == 128
    assert dataset.num_classes == 3
    labels = torch.cat([y for _, y in dataset.client_data])
    assert set(labels.tolist()) <= {0, 1, 2}

    args.dataset = "not_a_dataset"
    with pytest.raises(KeyError):
        build_dataset(args)


if __name__ == "__main__":
    test_shard_iid()
    test_shard_dirichlet()
    test_federated_dataset_validation()
    test_gaussian_regression()
    test_gaussian_mixture()
