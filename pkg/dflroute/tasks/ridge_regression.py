import argparse
from typing import Tuple

import numpy as np
import scipy.linalg
import torch

from . import BaseTask, register_task


@register_task("ridge_regression")
class RidgeRegression(BaseTask):
    r"""Federated ridge regression.

    Client objective :math:`F_n(w) = \frac{1}{2 D_n} \lVert X_n w - y_n \rVert^2 + \frac{\lambda}{2} \lVert w \rVert^2`,
    so the Hessian :math:`H_n = X_n^T X_n / D_n + \lambda I` is constant and the
    smoothness and strong-convexity constants are exact.
    """

    default_dataset = "gaussian_regression"
    default_model = "linear"

    @staticmethod
    def add_args(parser: argparse.ArgumentParser):
        """Add task-specific arguments to the parser."""
        BaseTask.add_args(parser)

    def hessians(self):
        out = []
        for x, _ in self.dataset.client_data:
            x = x.numpy()
            out.append(x.T @ x / x.shape[0] + self.regularizer * np.eye(x.shape[1]))
        return out

    def smoothness(self) -> Tuple[float, float]:
        """``(L, mu)``: largest and smallest Hessian eigenvalue over all clients."""
        eigs = [scipy.linalg.eigvalsh(h) for h in self.hessians()]
        big = max(float(e[-1]) for e in eigs)
        small = min(float(e[0]) for e in eigs)
        if not small > 0:
            raise ValueError("ridge objective is not strongly convex; increase regularizer or samples")
        return big, small

    def optimum(self) -> torch.Tensor:
        """Minimizer of the weighted global objective by direct linear solve."""
        p = self.weights.p.numpy()
        a = np.zeros((self.dataset.num_features, self.dataset.num_features))
        b = np.zeros((self.dataset.num_features, self.dataset.num_classes))
        for n, ((x, y), h) in enumerate(zip(self.dataset.client_data, self.hessians())):
            x, y = x.numpy(), y.numpy().reshape(x.shape[0], -1)
            a += p[n] * h
            b += p[n] * (x.T @ y) / x.shape[0]
        # the solution is the in x out weight grid, flattened like the model
        return torch.as_tensor(scipy.linalg.solve(a, b, assume_a="pos"), dtype=torch.float64).reshape(-1)
