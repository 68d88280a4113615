import numpy as np
import torch

from dflroute.data import FederatedDataset, shard_dirichlet, shard_iid, split_clients
from dflroute.utils import derive_seed, half_mse_loss, r2_score

from . import register_dataset


@register_dataset("gaussian_regression")
class GaussianRegression(FederatedDataset):
    """Linear targets ``y = x w + noise``; client inputs are drawn around client-specific means."""

    @staticmethod
    def add_args(parser):
        """Add dataset-specific arguments to the parser."""
        # fmt: off
        parser.add_argument("--samples-per-client", type=int, default=64)
        parser.add_argument("--test-samples", type=int, default=512)
        parser.add_argument("--features", type=int, default=16)
        parser.add_argument("--outputs", type=int, default=4)
        parser.add_argument("--noise", type=float, default=0.1)
        parser.add_argument("--heterogeneity", type=float, default=0.5)
        # fmt: on

    @classmethod
    def build_dataset_from_args(cls, args):
        return cls(
            num_clients=args.num_clients,
            samples_per_client=args.samples_per_client,
            test_samples=args.test_samples,
            features=args.features,
            outputs=getattr(args, "outputs", 1),
            noise=getattr(args, "noise", 0.1),
            heterogeneity=getattr(args, "heterogeneity", 0.5),
            seed=args.seed,
        )

    def __init__(
        self, num_clients, samples_per_client, test_samples, features, outputs=1, noise=0.1, heterogeneity=0.5, seed=0
    ):
        rng = np.random.default_rng(derive_seed(seed, "gaussian_regression"))
        w_true = rng.normal(0.0, 1.0, size=(features, outputs))
        client_data = []
        for _ in range(num_clients):
            shift = rng.normal(0.0, heterogeneity, size=features)
            x = rng.normal(shift, 1.0, size=(samples_per_client, features))
            y = x @ w_true + noise * rng.normal(size=(samples_per_client, outputs))
            client_data.append((torch.as_tensor(x, dtype=torch.float64), torch.as_tensor(y, dtype=torch.float64)))
        x_test = rng.normal(0.0, 1.0, size=(test_samples, features))
        y_test = x_test @ w_true + noise * rng.normal(size=(test_samples, outputs))
        super(GaussianRegression, self).__init__(
            client_data,
            (torch.as_tensor(x_test, dtype=torch.float64), torch.as_tensor(y_test, dtype=torch.float64)),
            num_features=features,
            num_classes=outputs,
        )
        self.w_true = torch.as_tensor(w_true, dtype=torch.float64)

    def get_loss_fn(self):
        return half_mse_loss

    def get_evaluator(self):
        return r2_score


@register_dataset("gaussian_mixture")
class GaussianMixture(FederatedDataset):
    """Classes are isotropic Gaussian blobs; shards are IID or Dirichlet label-skewed."""

    @staticmethod
    def add_args(parser):
        """Add dataset-specific arguments to the parser."""
        # fmt: off
        parser.add_argument("--samples-per-client", type=int, default=64)
        parser.add_argument("--test-samples", type=int, default=512)
        parser.add_argument("--features", type=int, default=16)
        parser.add_argument("--classes", type=int, default=4)
        parser.add_argument("--separation", type=float, default=1.0)
        parser.add_argument("--dirichlet-alpha", type=float, default=None)
        # fmt: on

    @classmethod
    def build_dataset_from_args(cls, args):
        return cls(
            num_clients=args.num_clients,
            samples_per_client=args.samples_per_client,
            test_samples=args.test_samples,
            features=args.features,
            classes=args.classes,
            separation=getattr(args, "separation", 1.0),
            dirichlet_alpha=getattr(args, "dirichlet_alpha", None),
            seed=args.seed,
        )

    def __init__(
        self,
        num_clients,
        samples_per_client,
        test_samples,
        features,
        classes,
        separation=1.0,
        dirichlet_alpha=None,
        seed=0,
    ):
        rng = np.random.default_rng(derive_seed(seed, "gaussian_mixture"))
        means = rng.normal(0.0, separation, size=(classes, features))

        def sample(count):
            labels = rng.permutation(np.arange(count) % classes)
            x = means[labels] + rng.normal(size=(count, features))
            return x, labels

        x, y = sample(num_clients * samples_per_client)
        if dirichlet_alpha is None:
            shards = shard_iid(len(y), num_clients, rng)
        else:
            shards = shard_dirichlet(y, num_clients, dirichlet_alpha, rng)
        x_test, y_test = sample(test_samples)
        super(GaussianMixture, self).__init__(
            split_clients(x, y, shards),
            (torch.as_tensor(x_test, dtype=torch.float64), torch.as_tensor(y_test)),
            num_features=features,
            num_classes=classes,
        )
