import numpy as np

from delmar.admm import AdmmConfig, LayerFactor
from delmar.metrics import split_observations
from delmar.pipeline import LayerStack
from delmar.synth import SynthSpec, generate
from tests import orthonormal_columns, random_matrix, rng


def two_level_truth(seed=0, **kwargs):
    return generate(SynthSpec(150, 800, (25, 6), seed=seed, **kwargs))


def noisy_two_level_truth(seed=0, relative_noise=0.01):
    """Two-level signal with dense noise at ``relative_noise`` of its RMS entry."""
    rms = SynthSpec(150, 800, (25, 6)).signal_rms()
    return two_level_truth(seed, noise_sigma=relative_noise * rms)


def low_rank_target(seed=0, m=40, n=120, h=5):
    return random_matrix(seed, m, h) @ random_matrix(seed + 1000, h, n)


def duplicated_halves(split_seed=0, seed=3):
    """Signal whose two split halves hold the same rows in the same order."""
    base = generate(SynthSpec(40, 200, (8,), seed=seed)).s
    first, second = split_observations(2 * base.shape[0], split_seed)
    s = np.empty((2 * base.shape[0], base.shape[1]))
    s[first] = base
    s[second] = base
    return s


def _zero_factor(x, y, k):
    shape = (x.shape[0], y.shape[1])
    return LayerFactor(x, y, np.zeros(shape), np.zeros(shape), k)


def random_stack(seed=0, m=10, n=20, ranks=(5, 3, 2)):
    generator = rng(seed)
    rows = (m,) + tuple(ranks[:-1])
    layers = [
        _zero_factor(
            generator.standard_normal((rows[k], ranks[k])),
            generator.standard_normal((ranks[k], n)),
            k + 1,
        )
        for k in range(len(ranks))
    ]
    return LayerStack(layers, generator.standard_normal((m, n)), AdmmConfig())


def perfect_stack(seed=0, m=20, n=30):
    """Noiseless two-layer stack with orthonormal weights and nonnegative deepest features."""
    x1 = orthonormal_columns(seed, m, 4)
    x2 = orthonormal_columns(seed + 1, 4, 2)
    y2 = rng(seed + 2).uniform(0.1, 1.0, size=(2, n))
    y1 = x2 @ y2
    source = x1 @ y1
    layers = [_zero_factor(x1, y1, 1), _zero_factor(x2, y2, 2)]
    return LayerStack(layers, source, AdmmConfig())
