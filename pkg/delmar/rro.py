"""
Rank reduction operator.

The effective rank of a factor matrix is read from the decay of ``|diag(R)|`` of its
QR factorization. Two spike detectors are computed on that diagonal, the weighted
difference and the weighted ratio, and the later of their two spikes is the cutoff.
"""
import logging
from typing import List

import numpy as np

from delmar.exceptions import (
    DivisionByZero,
    InputError,
    MatrixTooSmall,
    NonFiniteInput,
    VectorTooShort,
    ZeroPrefix,
)
from delmar.kernels import as_matrix, qr_decompose

logger = logging.getLogger("delmar")

EPS_CLAMP = 1e-12
FLAT_TOL = 1e-9


def _as_diagonal(d) -> np.ndarray:
    vec = np.asarray(d, dtype=np.float64).ravel()
    if vec.size < 2:
        raise VectorTooShort("diagonal statistics need at least 2 entries, got {}".format(vec.size))
    if not np.all(np.isfinite(vec)):
        raise NonFiniteInput("diagonal holds non-finite entries")
    if np.any(vec < 0):
        raise InputError("diagonal entries must be nonnegative")
    return vec


def weighted_difference(d) -> np.ndarray:
    """
    ``out[i] = (d[i] - d[i+1]) / (d[0] + ... + d[i])`` for ``i`` in ``0..len(d)-2``.

    :raises VectorTooShort: if ``d`` has fewer than two entries.
    :raises ZeroPrefix: if a prefix sum used as divisor is zero.
    """
    vec = _as_diagonal(d)
    cumsum = np.cumsum(vec)[:-1]
    if np.any(cumsum == 0.0):
        raise ZeroPrefix("weighted difference divides by a zero prefix sum")
    return -np.diff(vec) / cumsum


def weighted_ratio(d) -> np.ndarray:
    """
    Consecutive ratios ``d[i] / d[i+1]`` rescaled by ``(L - 2) / sum(ratios)``.

    For ``L == 2`` the scale factor is taken as 1 so the single ratio maps to 1.

    :raises VectorTooShort: if ``d`` has fewer than two entries.
    :raises DivisionByZero: if any ``d[i+1]`` is zero, or every ratio is zero.
    """
    vec = _as_diagonal(d)
    if np.any(vec[1:] == 0.0):
        raise DivisionByZero("weighted ratio divides by a zero diagonal entry")
    ratio = vec[:-1] / vec[1:]
    total = ratio.sum()
    if total == 0.0:
        raise DivisionByZero("weighted ratio normalizes by a zero sum")
    scale = vec.size - 2 if vec.size > 2 else 1
    return scale * ratio / total


class RankDecision:
    """
    Outcome of one rank estimation.

    ``wd_argmax`` and ``wr_argmax`` are 0-based positions of the spikes; the matching
    1-based ranks are those plus one. ``flat`` marks diagonals with no spike at all.
    """

    __slots__ = (
        "estimated_rank",
        "wd",
        "wr",
        "diag_abs",
        "wd_argmax",
        "wr_argmax",
        "flat",
        "shape",
    )

    def __init__(self, estimated_rank, wd, wr, diag_abs, wd_argmax, wr_argmax, flat, shape):
        self.estimated_rank = estimated_rank  # type: int
        self.wd = wd  # type: np.ndarray
        self.wr = wr  # type: np.ndarray
        self.diag_abs = diag_abs  # type: np.ndarray
        self.wd_argmax = wd_argmax  # type: int
        self.wr_argmax = wr_argmax  # type: int
        self.flat = flat  # type: bool
        self.shape = shape  # type: tuple

    def to_dict(self) -> dict:
        return {
            "estimated_rank": int(self.estimated_rank),
            "shape": [int(s) for s in self.shape],
            "wd_argmax": int(self.wd_argmax),
            "wr_argmax": int(self.wr_argmax),
            "flat": bool(self.flat),
            "diag_abs": [float(v) for v in self.diag_abs],
        }

    def __repr__(self) -> str:
        return "RankDecision(estimated_rank={}, shape={}, flat={})".format(
            self.estimated_rank, self.shape, self.flat
        )


def estimate_rank(y) -> RankDecision:
    """
    Estimate the effective rank of ``y``.

    The diagonal of the QR factor of ``y`` (tall orientation) is clamped below by
    ``EPS_CLAMP``; the spikes of the weighted difference and weighted ratio give two
    1-based candidates and the larger wins. A candidate equal to the smaller dimension
    is reduced by one, so the estimate always lies in ``[1, min(rows, cols) - 1]``.
    When neither statistic has a spike the candidate is the smaller dimension itself.

    :raises MatrixTooSmall: if the smaller dimension of ``y`` is below 2.
    """
    arr = as_matrix(y, "rank estimation input")
    min_dim = min(arr.shape)
    if min_dim < 2:
        raise MatrixTooSmall("rank estimation needs min(rows, cols) >= 2, got {}".format(arr.shape))

    diag_abs = np.maximum(qr_decompose(arr).diagonal(), EPS_CLAMP)
    wd = weighted_difference(diag_abs)
    wr = weighted_ratio(diag_abs)
    wd_argmax = int(np.argmax(wd))
    wr_argmax = int(np.argmax(wr))

    flat = bool(np.ptp(wd) <= FLAT_TOL and np.ptp(wr) <= FLAT_TOL * np.max(np.abs(wr)))
    if flat:
        candidate = min_dim
    else:
        candidate = max(wd_argmax + 1, wr_argmax + 1)

    if candidate == min_dim:
        estimated = candidate - 1
    else:
        estimated = candidate
    estimated = max(estimated, 1)

    if flat and min_dim > 2:
        logger.warning(
            "Flat QR diagonal for %s matrix, no rank cutoff found; reducing by one to %d",
            arr.shape,
            estimated,
        )
    logger.debug(
        "Rank estimate %d for %s matrix (wd spike %d, wr spike %d)",
        estimated,
        arr.shape,
        wd_argmax + 1,
        wr_argmax + 1,
    )
    return RankDecision(estimated, wd, wr, diag_abs, wd_argmax, wr_argmax, flat, arr.shape)


def rro_reduce(y, k: int) -> List[RankDecision]:
    """
    Apply the rank reduction operator up to ``k`` times.

    After each estimate ``y`` is truncated to its leading ``estimated_rank`` rows; the
    loop stops early once the rank reaches 1. Every step strictly lowers the rank.
    """
    if k < 1:
        raise InputError("rro_reduce needs k >= 1, got {}".format(k))
    current = as_matrix(y, "rank reduction input")
    decisions = []  # type: List[RankDecision]
    for _ in range(k):
        decision = estimate_rank(current)
        decisions.append(decision)
        if decision.estimated_rank <= 1:
            break
        current = current[: decision.estimated_rank, :]
        if min(current.shape) < 2:
            break
    return decisions
