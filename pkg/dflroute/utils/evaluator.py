import numpy as np
import torch


def accuracy(y_pred, y_true):
    y_true = y_true.squeeze().long()
    preds = y_pred.max(1)[1].type_as(y_true)
    correct = preds.eq(y_true).double()
    correct = correct.sum().item()
    return correct / len(y_true)


def cross_entropy_loss(y_pred, y_true):
    y_true = y_true.long()
    y_pred = torch.nn.functional.log_softmax(y_pred, dim=-1)
    return torch.nn.functional.nll_loss(y_pred, y_true)


def half_mse_loss(y_pred, y_true):
    """Per-sample 0.5 * squared error summed over outputs, averaged over samples."""
    y_pred = y_pred.reshape(y_pred.shape[0], -1)
    y_true = y_true.reshape(y_pred.shape[0], -1).to(y_pred.dtype)
    return 0.5 * torch.sum((y_pred - y_true) ** 2) / y_pred.shape[0]


def r2_score(y_pred, y_true):
    y_pred = y_pred.reshape(y_pred.shape[0], -1)
    y_true = y_true.reshape(y_pred.shape[0], -1).to(y_pred.dtype)
    residual = torch.sum((y_true - y_pred) ** 2)
    total = torch.sum((y_true - torch.mean(y_true, dim=0, keepdim=True)) ** 2)
    if total.item() == 0:
        return 0.0
    return 1.0 - (residual / total).item()


def jain_index(values):
    """Jain's fairness index (sum x)^2 / (N * sum x^2), in [1/N, 1]."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("jain_index needs at least one value")
    if np.any(x < 0):
        raise ValueError("jain_index is defined for non-negative values only")
    squares = float(np.sum(x * x))
    if squares == 0.0:
        raise ValueError("jain_index is undefined for an all-zero allocation")
    return float(np.sum(x)) ** 2 / (x.size * squares)
