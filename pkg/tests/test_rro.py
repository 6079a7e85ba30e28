import numpy as np
import pytest

from delmar.exceptions import (
    DivisionByZero,
    InputError,
    MatrixTooSmall,
    VectorTooShort,
    ZeroPrefix,
)
from delmar.rro import estimate_rank, rro_reduce, weighted_difference, weighted_ratio
from tests import random_matrix, rng, svd_rank, with_singular_values


def test_weighted_difference_examples():
    assert np.allclose(weighted_difference([4.0, 2.0, 1.0]), [0.5, 1.0 / 6.0])
    assert np.allclose(weighted_difference([3.0, 3.0, 3.0, 3.0]), 0.0)
    assert np.allclose(weighted_difference([1.0, 0.0]), [1.0])


def test_weighted_ratio_examples():
    assert np.allclose(weighted_ratio([4.0, 2.0, 1.0]), [0.5, 0.5])
    assert np.allclose(weighted_ratio([2.0] * 4), [2.0 / 3.0] * 3)
    assert np.allclose(weighted_ratio([10.0, 5.0]), [1.0])


def test_diagonal_statistics_errors():
    with pytest.raises(VectorTooShort):
        weighted_difference([1.0])
    with pytest.raises(VectorTooShort):
        weighted_ratio([1.0])
    with pytest.raises(ZeroPrefix):
        weighted_difference([0.0, 0.0, 1.0])
    with pytest.raises(DivisionByZero):
        weighted_ratio([1.0, 0.0])
    with pytest.raises(InputError):
        weighted_ratio([1.0, -1.0])


def test_weighted_ratio_is_scale_invariant():
    generator = rng(11)
    for _ in range(20):
        d = generator.uniform(0.1, 10.0, size=int(generator.integers(2, 12)))
        c = float(generator.uniform(0.1, 100.0))
        assert np.allclose(weighted_ratio(c * d), weighted_ratio(d), rtol=1e-12, atol=0.0)


def test_estimate_rank_on_known_spectrum():
    a = with_singular_values(0, 30, 20, [10.0, 5.0, 1e-9])
    decision = estimate_rank(a)
    assert decision.estimated_rank == 2
    assert not decision.flat
    assert np.all(decision.diag_abs >= 1e-12)


def test_estimate_rank_flat_diagonal():
    decision = estimate_rank(3.0 * np.eye(5))
    assert decision.flat
    assert decision.estimated_rank == 4


def test_estimate_rank_of_rank_one():
    a = np.outer(random_matrix(1, 20, 1), random_matrix(2, 1, 15))
    assert estimate_rank(a).estimated_rank == 1


def test_estimate_rank_bounds():
    generator = rng(5)
    for seed in range(30):
        rows, cols = (int(v) for v in generator.integers(2, 40, size=2))
        decision = estimate_rank(random_matrix(seed, rows, cols))
        assert 1 <= decision.estimated_rank <= max(1, min(rows, cols) - 1)
        assert decision.wd.shape == decision.wr.shape == (min(rows, cols) - 1,)


def test_estimate_rank_rejects_thin_matrices():
    with pytest.raises(MatrixTooSmall):
        estimate_rank(np.ones((1, 5)))


def test_estimate_rank_matches_svd_on_gapped_spectra():
    generator = rng(100)
    agreements = 0
    for seed in range(100):
        m = int(generator.integers(30, 61))
        n = int(generator.integers(200, 401))
        r = int(generator.integers(1, 11))
        top = generator.uniform(1.0, 10.0, size=r)
        tail = generator.uniform(0.5, 1.0, size=min(m, n) - r) * 1e-4 * top.min()
        a = with_singular_values(seed, m, n, np.concatenate([np.sort(top)[::-1], tail]))
        if estimate_rank(a).estimated_rank == svd_rank(a, 1e-3):
            agreements += 1
    assert agreements >= 95


def test_rro_reduce_reaches_rank_one():
    decisions = rro_reduce(random_matrix(3, 6, 100), 10)
    ranks = [d.estimated_rank for d in decisions]
    assert ranks[-1] == 1
    assert len(ranks) <= 5
    assert all(a > b for a, b in zip(ranks, ranks[1:]))


def test_rro_reduce_single_step_is_estimate():
    a = random_matrix(4, 8, 50)
    (decision,) = rro_reduce(a, 1)
    assert decision.estimated_rank == estimate_rank(a).estimated_rank
    assert np.array_equal(decision.wd, estimate_rank(a).wd)


def test_rro_reduce_stops_on_rank_one_input():
    a = np.outer(random_matrix(1, 10, 1), random_matrix(2, 1, 30))
    assert len(rro_reduce(a, 5)) == 1
    with pytest.raises(InputError):
        rro_reduce(a, 0)
