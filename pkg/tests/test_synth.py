import numpy as np
import pytest

from delmar.exceptions import InvalidSpec
from delmar.synth import MAX_BLOCK_OVERLAP, MIN_GAP, SynthSpec, generate
from tests import svd_rank
from tests.fixtures import two_level_truth


def test_single_level_signal_is_exact_product():
    truth = generate(SynthSpec(60, 200, (8,), seed=1))
    assert np.array_equal(truth.s, truth.x_true[0] @ truth.y_true)
    assert svd_rank(truth.s, 1e-8) == 8
    assert truth.details == []


def test_two_level_spectrum():
    truth = two_level_truth(0)
    spec = truth.spec
    assert svd_rank(truth.s, 1e-8) == 25
    singular = np.linalg.svd(truth.s, compute_uv=False)[:25]
    assert np.allclose(singular, spec.singular_values(), rtol=1e-6)
    assert [x.shape for x in truth.x_true] == [(150, 25), (25, 6)]
    assert [y.shape for y in truth.y_levels] == [(25, 800), (6, 800)]


def test_three_level_spectrum_has_one_rank_per_level():
    spec = SynthSpec(60, 300, (20, 8, 3), seed=5)
    s = generate(spec).s
    singular = np.linalg.svd(s, compute_uv=False)
    assert svd_rank(s, 1e-8) == 20
    assert np.allclose(singular[:20], spec.singular_values(), rtol=1e-6)
    for boundary in spec.ranks[1:]:
        assert singular[boundary - 1] / singular[boundary] >= MIN_GAP * (1 - 1e-6)


@pytest.mark.parametrize("ranks", [(8, 3), (12, 6, 2), (20, 10, 5, 1)])
def test_every_designed_component_clears_the_rank_cutoff(ranks):
    spec = SynthSpec(40, 120, ranks)
    sigma = spec.singular_values()
    assert sigma.size == ranks[0]
    assert np.all(sigma > 1e-8 * sigma[0])
    assert np.all(np.diff(sigma) <= 0.0)


def test_signal_rms_matches_noiseless_signal():
    truth = two_level_truth(6)
    rms = np.sqrt(np.mean(truth.s ** 2))
    assert truth.spec.signal_rms() == pytest.approx(rms, rel=1e-9)


def test_levels_chain_through_details():
    truth = two_level_truth(2)
    chained = truth.x_true[1] @ truth.y_levels[1] + truth.details[0]
    assert np.allclose(chained, truth.y_levels[0])
    assert np.allclose(truth.composed_weights(), truth.x_true[0] @ truth.x_true[1])
    weak = truth.spec.singular_values()[truth.spec.ranks[1] :]
    assert np.linalg.norm(truth.details[0]) == pytest.approx(np.linalg.norm(weak), rel=1e-8)


def test_generate_is_deterministic():
    a = two_level_truth(7, noise_sigma=0.1, background_density=0.02)
    b = two_level_truth(7, noise_sigma=0.1, background_density=0.02)
    assert np.array_equal(a.s, b.s)
    assert np.array_equal(a.z_true, b.z_true)
    assert all(np.array_equal(x, y) for x, y in zip(a.x_true, b.x_true))
    assert not np.array_equal(a.s, two_level_truth(8, noise_sigma=0.1).s)


def test_background_density():
    truth = generate(
        SynthSpec(100, 500, (10, 3), background_density=0.05, background_amplitude=2.0, seed=3)
    )
    assert np.count_nonzero(truth.z_true) == 2500
    assert set(np.unique(truth.z_true)) <= {-2.0, 0.0, 2.0}
    assert np.array_equal(truth.noise, np.zeros((100, 500)))


def test_deepest_features_are_blocks():
    truth = generate(SynthSpec(40, 200, (12, 5), seed=4))
    y = truth.y_true
    assert np.all(y >= 0.0)
    supports = []
    for row in y:
        active = np.flatnonzero(row)
        assert active.size > 0
        assert np.array_equal(active, np.arange(active[0], active[-1] + 1))
        supports.append(set(active))
    for a, b in zip(supports, supports[1:]):
        assert len(a & b) <= MAX_BLOCK_OVERLAP * min(len(a), len(b))
    wide = generate(SynthSpec(40, 200, (12, 5), block_overlap=MAX_BLOCK_OVERLAP, seed=4)).y_true
    assert np.count_nonzero((wide[0] > 0) & (wide[1] > 0)) == int(40 * MAX_BLOCK_OVERLAP)


@pytest.mark.parametrize(
    "fields",
    [
        {"ranks": (6, 6)},
        {"ranks": (3, 6)},
        {"ranks": (40,)},
        {"ranks": ()},
        {"ranks": (6,), "background_density": 1.0},
        {"ranks": (6,), "noise_sigma": -1.0},
        {"ranks": (6,), "gap": 10.0},
        {"ranks": (6,), "spread": 0.5},
        {"ranks": (6,), "block_overlap": 0.3},
        {"ranks": (12, 6, 2), "gap": 1e4},
    ],
)
def test_invalid_specs(fields):
    with pytest.raises(InvalidSpec):
        SynthSpec(40, 100, **fields)


def test_spec_dict_round_trip():
    spec = SynthSpec(40, 100, (6, 2), noise_sigma=0.5, seed=9)
    assert SynthSpec.from_dict(spec.to_dict()).to_dict() == spec.to_dict()
    with pytest.raises(InvalidSpec):
        SynthSpec.from_dict({"m": 4, "n": 4, "ranks": [2], "colour": 1})
