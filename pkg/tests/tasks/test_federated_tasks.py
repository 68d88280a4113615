import numpy as np
import pytest
import torch

from dflroute.tasks import BaseTask, build_task, register_task
from dflroute.trainers import NonFiniteError
from dflroute.utils import build_args_from_dict


def get_default_args(**kwargs):
    default_dict = {
        "task": "ridge_regression",
        "dataset": None,
        "model": None,
        "trainer": None,
        "seed": 0,
        "num_clients": 3,
        "samples_per_client": 16,
        "test_samples": 32,
        "features": 4,
        "outputs": 2,
        "classes": 3,
        "hidden_size": 8,
        "num_layers": 2,
        "dropout": 0.0,
        "batch_size": 16,
        "lr": 0.05,
        "local_epochs": 1,
        "regularizer": 0.1,
        "noise": 0.1,
        "heterogeneity": 0.5,
        "separation": 1.0,
        "dirichlet_alpha": None,
    }
    default_dict.update(kwargs)
    return build_args_from_dict(default_dict)


def finite_difference(task, params, client, coords, h=1e-6):
    out = []
    for i in coords:
        step = torch.zeros_like(params)
        step[i] = h
        up = task.client_loss(params + step, client).item()
        down = task.client_loss(params - step, client).item()
        out.append((up - down) / (2 * h))
    return torch.tensor(out, dtype=torch.float64)


def test_ridge_layout():
    task = build_task(get_default_args())
    assert task.dataset.num_clients == 3
    assert task.spec.layer_channels == (4, 2)
    assert task.spec.total_params == 8
    assert task.full_batch
    assert not build_task(get_default_args(batch_size=8)).full_batch
    assert torch.allclose(task.weights.p, torch.full((3,), 1.0 / 3.0, dtype=torch.float64))


def test_ridge_gradient():
    task = build_task(get_default_args())
    params = torch.randn(8, dtype=torch.float64, generator=torch.Generator().manual_seed(1))
    for client in range(3):
        grad = task.gradient(params, client)
        x, y = task.dataset.client_data[client]
        w = params.reshape(4, 2)
        expected = (x.t() @ (x @ w - y)) / x.shape[0] + 0.1 * w
        assert torch.allclose(grad, expected.reshape(-1), atol=1e-10)
        assert torch.allclose(grad, finite_difference(task, params, client, range(8)), atol=1e-5)


def test_full_batch_step():
    task = build_task(get_default_args())
    params = task.initial_params(0)
    grad = task.gradient(params, 1)
    updated = task.local_update(params, 1, torch.Generator().manual_seed(0))
    assert torch.allclose(updated, params - 0.05 * grad, atol=1e-12)


def test_ridge_optimum():
    task = build_task(get_default_args())
    optimum = task.optimum()
    assert optimum.shape == (8,)
    total = sum(task.weights.p[n] * task.gradient(optimum, n) for n in range(3))
    assert torch.allclose(total, torch.zeros(8, dtype=torch.float64), atol=1e-9)
    big, small = task.smoothness()
    assert big >= small > 0
    assert small >= 0.1 - 1e-9


def test_initial_params():
    task = build_task(get_default_args())
    assert torch.equal(task.initial_params(3), task.initial_params(3))
    assert not torch.equal(task.initial_params(3), task.initial_params(4))
    bound = 1.0 / np.sqrt(4)
    assert bool((task.initial_params(3).abs() <= bound).all())


def test_evaluate():
    task = build_task(get_default_args())
    loss, r2 = task.evaluate(task.optimum())
    assert np.isfinite(loss)
    assert 0.5 < r2 <= 1.0
    loss_init, r2_init = task.evaluate(task.initial_params(0))
    assert loss_init > loss


def test_softmax_mlp():
    args = get_default_args(task="softmax_mlp", regularizer=0.0)
    task = build_task(args)
    assert task.spec.layer_channels == (4, 8, 3)
    assert task.spec.total_params == 56
    params = task.initial_params(2)
    grad = task.gradient(params, 0)
    assert torch.allclose(grad[:6], finite_difference(task, params, 0, range(6)), atol=1e-5)
    loss, acc = task.evaluate(params)
    assert loss > 0
    assert 0.0 <= acc <= 1.0
    updated = task.local_update(params, 0, torch.Generator().manual_seed(0))
    assert updated.shape == params.shape
    assert not torch.equal(updated, params)


def test_non_finite_updates_raise():
    task = build_task(get_default_args(lr=1e10, local_epochs=100))
    with pytest.raises(NonFiniteError) as err:
        task.local_update(task.initial_params(0), 2, torch.Generator().manual_seed(0), 7)
    assert err.value.client == 2
    assert err.value.round == 7


def test_task_errors():
    with pytest.raises(KeyError):
        build_task(get_default_args(task="node_classification"))
    with pytest.raises(ValueError):
        build_task(get_default_args(lr=0.0))
    with pytest.raises(ValueError):
        build_task(get_default_args()).train(None)
    with pytest.raises(ValueError):

        @register_task("ridge_regression")
        class Duplicate(BaseTask):
            pass


if __name__ == "__main__":
    test_ridge_layout()
    test_ridge_gradient()
    test_full_batch_step()
    test_ridge_optimum()
    test_initial_params()
    test_evaluate()
    test_softmax_mlp()
    test_non_finite_updates_raise()
    test_task_errors()
