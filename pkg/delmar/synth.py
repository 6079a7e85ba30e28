"""
Synthetic hierarchical signals with known factors.

The signal spectrum is tiered. The deepest level holds a lead component ``lead_gap`` times
its next one, followed by components graded geometrically down by ``spread``. Every
shallower level adds flat components ``gap`` times weaker than the smallest value of the
level below it::

    ranks (25, 6)  ->  sigma = [lead_gap, 1 ... 1/spread (5 values), 1/(spread*gap) x 19] * scale

so the rank reduction operator finds each level's boundary as the largest ratio in the
features of the level above it. The whole spectrum must fit in ``MAX_DYNAMIC_RANGE``, which
keeps every designed component far above double precision round-off of the largest one.
The deepest features are nonnegative, block-sparse maps.
"""
import logging
import numbers
from typing import Any, Dict, List, Sequence

import numpy as np
import scipy.linalg as spla

from delmar.exceptions import InvalidSpec
from delmar.kernels import qr_decompose
from delmar.utils import make_rng

logger = logging.getLogger("delmar")

MIN_GAP = 100.0
MAX_DYNAMIC_RANGE = 1e7
MAX_BLOCK_OVERLAP = 0.2


class SynthSpec:
    """
    Fields:

    ``m``, ``n``:
        Signal shape, observations by variables.
    ``ranks``:
        Strictly decreasing level ranks, shallowest first.
    ``noise_sigma``:
        Standard deviation of dense Gaussian noise.
    ``background_density``, ``background_amplitude``:
        Fraction of entries holding a ``+-amplitude`` outlier.
    ``block_overlap``:
        Fraction of a block shared with the next deepest feature map, at most
        ``MAX_BLOCK_OVERLAP``.
    ``lead_gap``, ``spread``, ``gap``, ``scale``:
        Spectrum layout, see the module docstring.

    The default amplitude sits at the ADMM shrinkage threshold for the default penalty, so
    the sparse block absorbs the background exactly instead of smearing it.
    """

    __slots__ = (
        "m",
        "n",
        "ranks",
        "noise_sigma",
        "background_density",
        "background_amplitude",
        "block_overlap",
        "seed",
        "lead_gap",
        "spread",
        "gap",
        "scale",
    )

    def __init__(
        self,
        m: int,
        n: int,
        ranks: Sequence[int],
        noise_sigma: float = 0.0,
        background_density: float = 0.0,
        background_amplitude: float = 0.01,
        block_overlap: float = 0.05,
        seed: int = 0,
        lead_gap: float = 3.0,
        spread: float = 2.0,
        gap: float = 100.0,
        scale: float = 1000.0,
    ) -> None:
        self.m = m
        self.n = n
        self.ranks = tuple(ranks)
        self.noise_sigma = float(noise_sigma)
        self.background_density = float(background_density)
        self.background_amplitude = float(background_amplitude)
        self.block_overlap = float(block_overlap)
        self.seed = seed
        self.lead_gap = float(lead_gap)
        self.spread = float(spread)
        self.gap = float(gap)
        self.scale = float(scale)
        self.validate()

    def validate(self) -> None:
        for name in ("m", "n", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Integral):
                raise InvalidSpec("{} must be an integer, got {!r}".format(name, value))
        if self.m < 1 or self.n < 1:
            raise InvalidSpec("signal shape must be positive, got {}x{}".format(self.m, self.n))
        if not self.ranks:
            raise InvalidSpec("at least one rank is needed")
        if any(isinstance(r, bool) or not isinstance(r, numbers.Integral) or r < 1 for r in self.ranks):
            raise InvalidSpec("ranks must be positive integers, got {}".format(list(self.ranks)))
        if any(a <= b for a, b in zip(self.ranks, self.ranks[1:])):
            raise InvalidSpec("ranks must be strictly decreasing, got {}".format(list(self.ranks)))
        if self.ranks[0] >= min(self.m, self.n):
            raise InvalidSpec(
                "ranks[0]={} must be below min(m, n)={}".format(self.ranks[0], min(self.m, self.n))
            )
        if not self.noise_sigma >= 0.0:
            raise InvalidSpec("noise_sigma must be >= 0, got {}".format(self.noise_sigma))
        if not 0.0 <= self.background_density < 1.0:
            raise InvalidSpec(
                "background_density must be in [0, 1), got {}".format(self.background_density)
            )
        if not self.background_amplitude > 0.0:
            raise InvalidSpec(
                "background_amplitude must be > 0, got {}".format(self.background_amplitude)
            )
        if not 0.0 <= self.block_overlap <= MAX_BLOCK_OVERLAP:
            raise InvalidSpec(
                "block_overlap must be in [0, {}], got {}".format(
                    MAX_BLOCK_OVERLAP, self.block_overlap
                )
            )
        if not self.gap >= MIN_GAP:
            raise InvalidSpec("gap must be >= {}, got {}".format(MIN_GAP, self.gap))
        if not self.lead_gap >= 1.0 or not self.spread >= 1.0 or not self.scale > 0.0:
            raise InvalidSpec("lead_gap and spread must be >= 1 and scale > 0")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise InvalidSpec("seed must fit in 64 unsigned bits, got {}".format(self.seed))
        sigma = self.singular_values()
        span = sigma[0] / sigma[-1]
        if span > MAX_DYNAMIC_RANGE:
            raise InvalidSpec(
                "spectrum spans a factor {:.3g}, above {:.0e}".format(span, MAX_DYNAMIC_RANGE)
            )

    def singular_values(self) -> np.ndarray:
        """The designed nonzero singular values of the noiseless signal, largest first."""
        sigma = np.empty(self.ranks[0])
        deepest = self.ranks[-1]
        sigma[0] = self.scale * self.lead_gap
        if deepest > 1:
            sigma[1:deepest] = self.scale * np.geomspace(1.0, 1.0 / self.spread, deepest - 1)
        floor = sigma[deepest - 1]
        bounds = list(reversed(self.ranks))
        for start, stop in zip(bounds, bounds[1:]):
            floor /= self.gap
            sigma[start:stop] = floor
        return sigma

    def signal_rms(self) -> float:
        """Root mean square entry of the noiseless low-rank signal."""
        return float(np.linalg.norm(self.singular_values()) / np.sqrt(self.m * self.n))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": int(self.m),
            "n": int(self.n),
            "ranks": [int(r) for r in self.ranks],
            "noise_sigma": self.noise_sigma,
            "background_density": self.background_density,
            "background_amplitude": self.background_amplitude,
            "block_overlap": self.block_overlap,
            "seed": int(self.seed),
            "lead_gap": self.lead_gap,
            "spread": self.spread,
            "gap": self.gap,
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, params: Dict[str, Any]) -> "SynthSpec":
        unknown = set(params) - set(cls.__slots__)
        if unknown:
            raise InvalidSpec("Unknown spec fields: {}".format(", ".join(sorted(unknown))))
        return cls(**params)


class GroundTruth:
    """
    Generated factors.

    ``y_levels[k]`` are the features of level ``k + 1`` and ``y_true`` is the deepest of
    them. ``details[k]`` is the part of ``y_levels[k]`` the next level does not explain:

        s == x_true[0] @ y_levels[0] + z_true + noise
        y_levels[k] == x_true[k + 1] @ y_levels[k + 1] + details[k]

    The first identity is exact; the second holds to rounding.
    """

    __slots__ = ("spec", "x_true", "y_levels", "details", "z_true", "noise", "s")

    def __init__(self, spec, x_true, y_levels, details, z_true, noise, s) -> None:
        self.spec = spec  # type: SynthSpec
        self.x_true = x_true  # type: List[np.ndarray]
        self.y_levels = y_levels  # type: List[np.ndarray]
        self.details = details  # type: List[np.ndarray]
        self.z_true = z_true  # type: np.ndarray
        self.noise = noise  # type: np.ndarray
        self.s = s  # type: np.ndarray

    @property
    def y_true(self) -> np.ndarray:
        return self.y_levels[-1]

    def composed_weights(self) -> np.ndarray:
        weights = self.x_true[0]
        for x in self.x_true[1:]:
            weights = weights @ x
        return weights


def block_sparse_features(
    rows: int, n: int, rng: np.random.Generator, overlap: float = MAX_BLOCK_OVERLAP
) -> np.ndarray:
    """
    Nonnegative maps, each active on one contiguous block of columns.

    Consecutive blocks share ``int(stride * overlap)`` columns.
    """
    stride = n // rows
    width = stride + int(stride * overlap)
    features = np.zeros((rows, n))
    for i in range(rows):
        start = i * stride
        stop = min(start + width, n)
        features[i, start:stop] = rng.uniform(0.5, 1.5, size=stop - start)
    return features


def _random_orthogonal(size: int, rng: np.random.Generator) -> np.ndarray:
    return qr_decompose(rng.standard_normal((size, size))).q


def generate(spec: SynthSpec) -> GroundTruth:
    """
    Draw a signal and its factors from ``spec``; the same spec always gives the same arrays.

    :raises InvalidSpec: if the spec breaks its invariants.
    """
    spec.validate()
    rng = make_rng(spec.seed, 0, "synth")
    ranks = spec.ranks
    depth = len(ranks)
    deepest = ranks[-1]
    sigma = spec.singular_values()

    y_true = block_sparse_features(deepest, spec.n, rng, spec.block_overlap)
    # Row basis whose leading rows span the deepest features.
    completion = rng.standard_normal((spec.n, ranks[0] - deepest))
    basis = qr_decompose(np.hstack([y_true.T, completion])).q.T
    u = qr_decompose(rng.standard_normal((spec.m, ranks[0]))).q
    rotations = [_random_orthogonal(ranks[k - 1], rng) for k in range(1, depth)]

    # Coefficients taking the deepest features to their scaled basis rows.
    coupling = y_true @ basis[:deepest].T
    to_basis = spla.solve(coupling.T, np.diag(sigma[:deepest])).T
    canonical = [sigma[:r, np.newaxis] * basis[:r] for r in ranks]

    if depth == 1:
        x_true = [u @ to_basis]
        y_levels = [y_true]
    else:
        x_true = [u @ rotations[0].T]
        for k in range(1, depth - 1):
            x_true.append(rotations[k - 1][:, : ranks[k]] @ rotations[k].T)
        x_true.append(rotations[-1][:, :deepest] @ to_basis)
        y_levels = [rotations[k] @ canonical[k] for k in range(depth - 1)] + [y_true]
    details = [y_levels[k] - x_true[k + 1] @ y_levels[k + 1] for k in range(depth - 1)]

    count = int(round(spec.background_density * spec.m * spec.n))
    z_true = np.zeros((spec.m, spec.n))
    positions = rng.choice(spec.m * spec.n, size=count, replace=False)
    signs = rng.choice(np.array([-1.0, 1.0]), size=count)
    z_true.flat[positions] = spec.background_amplitude * signs

    noise = spec.noise_sigma * rng.standard_normal((spec.m, spec.n))
    s = x_true[0] @ y_levels[0] + z_true + noise
    logger.debug(
        "Generated %dx%d signal with ranks %s, %d background entries",
        spec.m,
        spec.n,
        list(ranks),
        count,
    )
    return GroundTruth(spec, x_true, y_levels, details, z_true, noise, s)
