import pytest
import torch

from dflroute.operators import (
    ClientWeights,
    ReceivedSet,
    aggregate_dense,
    bias_norm_sum,
    coefficients_dense,
    ideal_global,
    lambda_coeffs,
    lambda_coeffs_dense,
    local_aggregate,
)


def test_client_weights():
    weights = ClientWeights.from_sizes([1, 1, 2])
    assert weights.p.tolist() == [0.25, 0.25, 0.5]
    assert weights.p_max == 0.5
    assert len(weights) == 3
    with pytest.raises(ValueError):
        ClientWeights.from_sizes([1, 0])
    with pytest.raises(ValueError):
        ClientWeights(torch.tensor([0.5, 0.6]))
    with pytest.raises(ValueError):
        ClientWeights(torch.tensor([]))


def test_full_delivery_gives_ideal_average():
    torch.manual_seed(0)
    weights = ClientWeights.from_sizes([3, 1, 4, 2])
    models = torch.randn(4, 10, dtype=torch.float64)
    indicators = torch.ones(4, 10, dtype=torch.float64)
    expected = ideal_global(models, weights)
    for receiver in range(4):
        assert torch.allclose(aggregate_dense(receiver, models, indicators, weights), expected)
        zeros = torch.zeros(4, 10, dtype=torch.float64)
        assert torch.allclose(lambda_coeffs_dense(receiver, indicators, weights), zeros)


def test_partial_delivery_is_per_element():
    weights = ClientWeights.from_sizes([1, 1])
    models = torch.tensor([[1.0, 1.0], [3.0, 3.0]], dtype=torch.float64)
    indicators = torch.tensor([[1.0, 1.0], [1.0, 0.0]], dtype=torch.float64)
    assert aggregate_dense(0, models, indicators, weights).tolist() == [2.0, 1.0]
    coeffs = coefficients_dense(0, indicators, weights)
    assert coeffs.tolist() == [[0.5, 1.0], [0.5, 0.0]]
    assert torch.allclose(lambda_coeffs_dense(0, indicators, weights).sum(dim=0), torch.zeros(2, dtype=torch.float64))

    with pytest.raises(ValueError):
        aggregate_dense(1, models, indicators, weights)


def test_received_set():
    weights = ClientWeights.from_sizes([1, 2, 1])
    models = {0: torch.tensor([1.0, 2.0, 3.0]), 2: torch.tensor([5.0, 6.0, 7.0])}
    received = ReceivedSet(0, models=models, indicators={2: torch.tensor([1.0, 1.0, 0.0])})
    dense_models, dense_indicators = received.dense(3)
    assert dense_indicators.tolist() == [[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]
    assert dense_models[1].tolist() == [0.0, 0.0, 0.0]
    out = local_aggregate(received, weights)
    assert out.tolist() == [3.0, 4.0, 3.0]
    assert torch.allclose(lambda_coeffs(received, weights).sum(dim=0), torch.zeros(3, dtype=torch.float64))

    with pytest.raises(ValueError):
        ReceivedSet(1, models=models).dense(3)
    with pytest.raises(ValueError):
        ReceivedSet(0, models={0: torch.zeros(3), 2: torch.zeros(2)}).dense(3)


def test_global_and_bias():
    weights = ClientWeights.from_sizes([1, 1])
    models = [torch.tensor([1.0, 0.0]), torch.tensor([0.0, 1.0])]
    assert ideal_global(models, weights).tolist() == [0.5, 0.5]
    assert bias_norm_sum(models, torch.zeros(2)) == pytest.approx(2.0)
    assert bias_norm_sum(models, ideal_global(models, weights)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ideal_global(models[:1], weights)
    with pytest.raises(ValueError):
        bias_norm_sum(models, torch.zeros(3))


if __name__ == "__main__":
    test_client_weights()
    test_full_delivery_gives_ideal_average()
    test_partial_delivery_is_per_element()
    test_received_set()
    test_global_and_bias()
