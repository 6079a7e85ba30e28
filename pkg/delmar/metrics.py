"""
Evaluation of recovered feature maps.

Feature rows are compared to reference maps by the overlap of their positive supports,
the Hausdorff distance between those supports and their Pearson correlation. Split-half
reproducibility decomposes two disjoint halves of the observations and correlates the
matched first-layer features.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from delmar.admm import AdmmConfig
from delmar.exceptions import (
    EmptySupport,
    LengthMismatch,
    ShapeMismatch,
    TooFewObservations,
    ZeroSignal,
)
from delmar.kernels import as_matrix
from delmar.pipeline import DEFAULT_MAX_LAYERS, LayerStack, decompose, hierarchy_features
from delmar.utils import make_rng

logger = logging.getLogger("delmar")


def _as_row(a, name: str) -> np.ndarray:
    row = np.asarray(a, dtype=np.float64)
    if row.ndim == 2 and 1 in row.shape:
        row = row.ravel()
    if row.ndim != 1:
        raise ShapeMismatch("{} must be a single row, got shape {}".format(name, row.shape))
    return row


def positive_support(row, threshold: float = 0.0) -> np.ndarray:
    """Indices of the entries strictly above ``threshold``."""
    return np.flatnonzero(_as_row(row, "row") > threshold)


def overlap_similarity(a, b, threshold: float = 0.0) -> float:
    """
    ``|supp(a) & supp(b)| / |supp(a) | supp(b)|`` over the supports above ``threshold``.

    Two empty supports are identical and give 1.

    :raises LengthMismatch: if ``a`` and ``b`` differ in length.
    """
    a = _as_row(a, "a")
    b = _as_row(b, "b")
    if a.shape != b.shape:
        raise LengthMismatch("can not compare maps of length {} and {}".format(a.size, b.size))
    in_a = a > threshold
    in_b = b > threshold
    union = int(np.count_nonzero(in_a | in_b))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(in_a & in_b)) / union


def _support_points(support, coords) -> np.ndarray:
    indices = [int(i) for i in support]
    if coords is None:
        return np.asarray(indices, dtype=np.float64).reshape(-1, 1)
    return np.asarray([np.atleast_1d(coords[i]) for i in indices], dtype=np.float64)


def hausdorff_distance(a_support, b_support, coords=None) -> float:
    """
    Symmetric Hausdorff distance between two index sets.

    ``coords`` maps an index to its coordinate (a scalar or a vector); by default an index
    is its own position on a line.

    :raises EmptySupport: if either set is empty.
    """
    if len(a_support) == 0 or len(b_support) == 0:
        raise EmptySupport("hausdorff distance needs two nonempty supports")
    points_a = _support_points(a_support, coords)
    points_b = _support_points(b_support, coords)
    return float(
        max(directed_hausdorff(points_a, points_b)[0], directed_hausdorff(points_b, points_a)[0])
    )


def relative_error(s, reconstruction) -> float:
    """
    ``||reconstruction - s|| / ||s||`` in the Frobenius norm.

    :raises ShapeMismatch: if the shapes differ.
    :raises ZeroSignal: if ``s`` is all zeros.
    """
    s = as_matrix(s, "signal")
    reconstruction = as_matrix(reconstruction, "reconstruction")
    if s.shape != reconstruction.shape:
        raise ShapeMismatch(
            "reconstruction shape {} differs from signal shape {}".format(
                reconstruction.shape, s.shape
            )
        )
    norm = float(np.linalg.norm(s))
    if norm == 0.0:
        raise ZeroSignal("relative error is undefined for an all-zero signal")
    return float(np.linalg.norm(reconstruction - s)) / norm


def nonzero_fraction(z) -> float:
    z = np.asarray(z)
    return float(np.count_nonzero(z)) / z.size if z.size else 0.0


def pearson(a, b) -> float:
    """Pearson correlation of two rows; 0 when either row is constant."""
    a = _as_row(a, "a")
    b = _as_row(b, "b")
    if a.shape != b.shape:
        raise LengthMismatch("can not correlate rows of length {} and {}".format(a.size, b.size))
    a = a - a.mean()
    b = b - b.mean()
    denominator = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denominator == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / denominator, -1.0, 1.0))


def correlation_matrix(rows_a, rows_b) -> np.ndarray:
    rows_a = as_matrix(rows_a, "rows")
    rows_b = as_matrix(rows_b, "rows")
    if rows_a.shape[1] != rows_b.shape[1]:
        raise LengthMismatch(
            "rows of length {} and {} can not be correlated".format(rows_a.shape[1], rows_b.shape[1])
        )
    return np.array([[pearson(a, b) for b in rows_b] for a in rows_a]).reshape(
        rows_a.shape[0], rows_b.shape[0]
    )


def match_components(correlations: np.ndarray) -> List[Tuple[int, int, float]]:
    """
    Greedy matching on ``|correlations|`` without replacement.

    The largest remaining entry is taken first, ties going to the lowest flat index.
    Returns ``(row, column, signed correlation)`` triples in matching order.
    """
    scores = np.abs(np.asarray(correlations, dtype=np.float64))
    pairs = []  # type: List[Tuple[int, int, float]]
    free_rows = np.ones(scores.shape[0], dtype=bool)
    free_cols = np.ones(scores.shape[1], dtype=bool)
    for _ in range(min(scores.shape)):
        masked = np.where(free_rows[:, np.newaxis] & free_cols[np.newaxis, :], scores, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        pairs.append((int(i), int(j), float(correlations[i, j])))
        free_rows[i] = False
        free_cols[j] = False
    return pairs


class SimilarityReport:
    """
    Agreement between recovered feature rows and reference maps.

    ``overlap_similarity``, ``hausdorff_distance`` and ``pearson_r`` are means over the
    matched pairs. A component matched with negative correlation is sign-flipped before
    its support is taken. ``hausdorff_distance`` is ``None`` when no matched pair has two
    nonempty supports.
    """

    __slots__ = ("overlap_similarity", "hausdorff_distance", "pearson_r", "matched_pairs", "pairs")

    def __init__(
        self,
        overlap_similarity: float,
        hausdorff_distance: Optional[float],
        pearson_r: float,
        matched_pairs: List[Tuple[int, int, float]],
        pairs: List[Dict[str, Any]],
    ) -> None:
        self.overlap_similarity = overlap_similarity
        self.hausdorff_distance = hausdorff_distance
        self.pearson_r = pearson_r
        self.matched_pairs = matched_pairs
        self.pairs = pairs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "overlap_similarity": self.overlap_similarity,
            "hausdorff_distance": self.hausdorff_distance,
            "pearson_r": self.pearson_r,
            "matched_pairs": [list(pair) for pair in self.matched_pairs],
            "pairs": self.pairs,
        }


def compare_to_templates(
    features, templates, threshold: float = 0.0, coords=None
) -> SimilarityReport:
    features = as_matrix(features, "features")
    templates = as_matrix(templates, "templates")
    matches = match_components(correlation_matrix(features, templates))

    pairs = []  # type: List[Dict[str, Any]]
    for component, template, r in matches:
        row = features[component] if r >= 0 else -features[component]
        support_a = positive_support(row, threshold)
        support_b = positive_support(templates[template], threshold)
        distance = None  # type: Optional[float]
        if support_a.size and support_b.size:
            distance = hausdorff_distance(support_a, support_b, coords)
        pairs.append(
            {
                "component": component,
                "template": template,
                "pearson_r": r,
                "overlap_similarity": overlap_similarity(row, templates[template], threshold),
                "hausdorff_distance": distance,
            }
        )

    distances = [p["hausdorff_distance"] for p in pairs if p["hausdorff_distance"] is not None]
    return SimilarityReport(
        overlap_similarity=float(np.mean([p["overlap_similarity"] for p in pairs])),
        hausdorff_distance=float(np.mean(distances)) if distances else None,
        pearson_r=float(np.mean([p["pearson_r"] for p in pairs])),
        matched_pairs=[(c, t, abs(r)) for c, t, r in matches],
        pairs=pairs,
    )


def split_observations(m: int, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Random disjoint halves of the row indices ``0..m-1``, each sorted.

    With an odd ``m`` the leftover row belongs to neither half.

    :raises TooFewObservations: if ``m < 2``.
    """
    if m < 2:
        raise TooFewObservations("need at least 2 observations to split, got {}".format(m))
    order = make_rng(seed, 0, "split").permutation(m)
    half = m // 2
    return np.sort(order[:half]), np.sort(order[half : 2 * half])


class ReproducibilityReport:
    __slots__ = ("value", "matched_pairs", "first_half", "second_half", "ranks")

    def __init__(self, value, matched_pairs, first_half, second_half, ranks) -> None:
        self.value = value  # type: float
        self.matched_pairs = matched_pairs  # type: List[Tuple[int, int, float]]
        self.first_half = first_half  # type: np.ndarray
        self.second_half = second_half  # type: np.ndarray
        self.ranks = ranks  # type: Tuple[List[int], List[int]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reproducibility": self.value,
            "matched_pairs": [list(pair) for pair in self.matched_pairs],
            "first_half": [int(i) for i in self.first_half],
            "second_half": [int(i) for i in self.second_half],
            "ranks": [list(self.ranks[0]), list(self.ranks[1])],
        }


def reproducibility_report(
    s,
    config: Optional[AdmmConfig] = None,
    initial_rank: Optional[int] = None,
    seed: int = 0,
    max_layers: int = DEFAULT_MAX_LAYERS,
    mbp: bool = True,
    parallel: bool = False,
) -> ReproducibilityReport:
    """
    Decompose two random halves of the observations with the same settings and match their
    first-layer features by absolute correlation.
    """
    signal = as_matrix(s, "signal")
    first, second = split_observations(signal.shape[0], seed)

    def run(rows: Sequence[int]) -> LayerStack:
        stack, _ = decompose(
            signal[rows], config, initial_rank=initial_rank, max_layers=max_layers, mbp=mbp
        )
        return stack

    if parallel:
        with ThreadPoolExecutor(max_workers=2) as executor:
            stack_a, stack_b = executor.map(run, (first, second))
    else:
        stack_a, stack_b = run(first), run(second)

    matches = match_components(
        correlation_matrix(hierarchy_features(stack_a, 1), hierarchy_features(stack_b, 1))
    )
    value = float(np.clip(np.mean([abs(r) for _, _, r in matches]), 0.0, 1.0))
    logger.info("Split-half reproducibility %.4f over %d matched components", value, len(matches))
    return ReproducibilityReport(
        value,
        [(i, j, abs(r)) for i, j, r in matches],
        first,
        second,
        (stack_a.ranks, stack_b.ranks),
    )


def split_half_reproducibility(
    s,
    config: Optional[AdmmConfig] = None,
    initial_rank: Optional[int] = None,
    seed: int = 0,
    **kwargs
) -> float:
    """
    Mean matched ``|r|`` between first-layer features of two disjoint observation halves.

    :raises TooFewObservations: if ``s`` has fewer than 2 rows.
    """
    return reproducibility_report(s, config, initial_rank, seed, **kwargs).value
