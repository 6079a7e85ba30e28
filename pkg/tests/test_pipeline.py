import numpy as np
import pytest

from delmar.admm import TERMINATION_TOLERANCE, AdmmConfig
from delmar.exceptions import ConfigurationError, DegenerateInput, LayerOutOfRange
from delmar.mbp import backpropagate
from delmar.metrics import correlation_matrix, relative_error
from delmar.pipeline import (
    decompose,
    default_initial_rank,
    hierarchy_features,
    layer_residuals,
    orient_layer,
    reconstruct,
)
from tests import random_matrix
from tests.fixtures import noisy_two_level_truth, random_stack, two_level_truth


def test_two_level_depth_and_ranks():
    recovered = 0
    for seed in range(10):
        stack, _ = decompose(two_level_truth(seed).s, AdmmConfig(), initial_rank=25)
        if stack.depth == 2 and stack.ranks == [25, 6]:
            recovered += 1
    assert recovered >= 9


def test_noisy_two_level_depth_and_ranks():
    config = AdmmConfig(max_iter=150)
    recovered = 0
    for seed in range(100):
        truth = noisy_two_level_truth(seed)
        stack, _ = decompose(truth.s, config, initial_rank=25, mbp=False)
        if stack.depth == 2 and stack.ranks == [25, 6]:
            recovered += 1
    assert recovered >= 95


def test_two_level_reconstruction():
    truth = two_level_truth(1, gap=1e3)
    stack, traces = decompose(truth.s, AdmmConfig(), initial_rank=25)
    assert stack.mbp_applied
    assert relative_error(truth.s, reconstruct(stack, 1)) <= 1e-5
    assert relative_error(truth.s, reconstruct(stack, 2)) <= 5e-3
    for trace in traces:
        if trace.termination == TERMINATION_TOLERANCE:
            assert trace.final_residual <= AdmmConfig().tol
    assert np.count_nonzero(stack.layers[0].z) == 0


def test_rank_one_signal_has_depth_one():
    s = np.outer(random_matrix(0, 20, 1), random_matrix(1, 1, 15))
    stack, traces = decompose(s)
    assert stack.depth == 1
    assert len(traces) == 1
    assert stack.ranks == [default_initial_rank(s.shape)]


def test_max_layers_caps_depth():
    stack, _ = decompose(two_level_truth(0).s, initial_rank=25, max_layers=1)
    assert stack.depth == 1
    assert stack.rank_decisions == []


def test_decompose_rejects_bad_input():
    with pytest.raises(DegenerateInput):
        decompose(np.ones((2, 10)))
    with pytest.raises(ConfigurationError):
        decompose(random_matrix(0, 10, 10), max_layers=0)


def test_reconstruction_is_associative():
    stack, _ = decompose(two_level_truth(2).s, initial_rank=25)
    x1, x2 = stack.layers[0].x, stack.layers[1].x
    y2 = stack.layers[1].y
    left = (x1 @ x2) @ y2
    right = x1 @ (x2 @ y2)
    assert np.linalg.norm(left - right) <= 1e-12 * np.linalg.norm(left)
    assert np.allclose(reconstruct(stack, 2), left + stack.layers[0].z)


def test_layer_access():
    stack, _ = decompose(two_level_truth(3).s, initial_rank=25)
    features = hierarchy_features(stack, stack.depth)
    assert features.shape == (stack.ranks[-1], 800)
    features[:] = 0.0
    assert np.any(stack.layers[-1].y != 0.0)
    assert all(a > b for a, b in zip(stack.ranks, stack.ranks[1:]))
    assert stack.depth <= min(stack.source_shape) - 1
    for k in (0, stack.depth + 1):
        with pytest.raises(LayerOutOfRange):
            stack.layer(k)
        with pytest.raises(LayerOutOfRange):
            reconstruct(stack, k)


def test_backpropagation_does_not_worsen_reconstruction():
    for seed in range(3):
        truth = noisy_two_level_truth(seed)
        plain, _ = decompose(truth.s, initial_rank=25, mbp=False, max_layers=2)
        assert plain.depth == 2
        refined = backpropagate(plain)
        for k in range(1, plain.depth + 1):
            before = relative_error(truth.s, reconstruct(plain, k))
            after = relative_error(truth.s, reconstruct(refined, k))
            assert after <= before + 1e-9


def test_decompose_is_deterministic():
    s = two_level_truth(4, noise_sigma=1e-3).s
    a, traces_a = decompose(s, initial_rank=25)
    b, traces_b = decompose(s, initial_rank=25)
    assert a.ranks == b.ranks
    for la, lb in zip(a.layers, b.layers):
        for name in ("x", "y", "z", "e"):
            assert np.array_equal(getattr(la, name), getattr(lb, name))
    assert [t.to_dict() for t in traces_a] == [t.to_dict() for t in traces_b]


def test_layer_residuals_rows():
    stack, _ = decompose(two_level_truth(5).s, initial_rank=25)
    rows = layer_residuals(stack)
    assert [row["layer"] for row in rows] == list(range(1, stack.depth + 1))
    assert rows[0]["fit_residual"] <= 1e-5
    assert stack.to_dict()["ranks"] == stack.ranks


def test_backpropagation_strictly_improves_deepest_reconstruction():
    improved = 0
    for seed in range(100):
        truth = two_level_truth(seed)
        plain, _ = decompose(truth.s, initial_rank=25, mbp=False, max_layers=2)
        assert plain.depth == 2
        refined = backpropagate(plain)
        before = relative_error(truth.s, reconstruct(plain, 2))
        after = relative_error(truth.s, reconstruct(refined, 2))
        if after < before:
            improved += 1
    assert improved >= 90


def test_deepest_features_correlate_with_ground_truth():
    for seed in (0, 7):
        truth = two_level_truth(seed)
        stack, _ = decompose(truth.s, initial_rank=25)
        assert stack.ranks == [25, 6]
        correlations = correlation_matrix(hierarchy_features(stack, 2), truth.y_true)
        assert np.all(np.diag(correlations) >= 0.8)


def test_orient_layer_keeps_product():
    layer = random_stack(4, m=12, n=30, ranks=(5, 3)).layers[0]
    oriented = orient_layer(layer)
    assert np.allclose(oriented.product(), layer.product())
    gram = oriented.y @ oriented.y.T
    assert np.allclose(gram, np.diag(np.diag(gram)), atol=1e-10 * gram[0, 0])
    assert np.all(np.diff(np.diag(gram)) <= 1e-12 * gram[0, 0])
    peaks = oriented.y[np.arange(5), np.argmax(np.abs(oriented.y), axis=1)]
    assert np.all(peaks > 0.0)
    assert np.array_equal(oriented.z, layer.z)
