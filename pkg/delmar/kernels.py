"""
Dense matrix primitives shared by every solver stage.

All functions are pure: they never modify their inputs and keep no state, so they
may be called concurrently from any number of threads.
"""
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as spla

from delmar.exceptions import NegativeThreshold, NonFiniteInput, ShapeMismatch

EPS = np.finfo(np.float64).eps


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """
    Coerce ``a`` to a 2-D float64 array and reject empty or non-finite input.

    :raises NonFiniteInput: if any entry is NaN or Inf.
    :raises ShapeMismatch: if ``a`` is not two dimensional or has an empty axis.
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch("{} must be 2-D, got shape {}".format(name, arr.shape))
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatch("{} must have rows >= 1 and cols >= 1, got {}".format(name, arr.shape))
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("{} holds non-finite entries".format(name))
    return arr


class QrResult:
    """
    Thin QR factors.

    ``q`` has orthonormal columns and ``r`` is upper triangular with a nonnegative
    diagonal. Wide inputs are factored in their tall orientation: in that case
    ``transposed`` is set and ``q @ r`` reproduces ``a.T``; :meth:`reconstruct` always
    returns the original orientation. ``perm`` is set only for pivoted factorizations,
    with ``q @ r`` equal to the permuted columns.
    """

    __slots__ = ("q", "r", "transposed", "perm")

    def __init__(
        self,
        q: np.ndarray,
        r: np.ndarray,
        transposed: bool = False,
        perm: Optional[np.ndarray] = None,
    ) -> None:
        self.q = q
        self.r = r
        self.transposed = transposed
        self.perm = perm

    def diagonal(self) -> np.ndarray:
        return np.abs(np.diag(self.r))

    def reconstruct(self) -> np.ndarray:
        qr = self.q @ self.r
        if self.perm is not None:
            unpermuted = np.empty_like(qr)
            unpermuted[:, self.perm] = qr
            qr = unpermuted
        return qr.T if self.transposed else qr


def qr_decompose(a, pivoting: bool = False) -> QrResult:
    """
    Householder QR in economy form.

    Column signs of ``q`` are flipped so that ``r`` has a nonnegative diagonal, which
    makes the factors identical across LAPACK builds. Column pivoting is applied only
    when ``pivoting`` is requested.

    :raises NonFiniteInput: if ``a`` holds NaN or Inf.
    """
    arr = as_matrix(a, "qr input")
    transposed = arr.shape[0] < arr.shape[1]
    tall = arr.T if transposed else arr

    perm = None
    if pivoting:
        q, r, perm = spla.qr(tall, mode="economic", pivoting=True)
    else:
        q, r = spla.qr(tall, mode="economic")

    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q = q * signs[np.newaxis, :]
    r = r * signs[:, np.newaxis]
    return QrResult(q, r, transposed=transposed, perm=perm)


def orthonormal_basis(a, columns: Optional[int] = None) -> np.ndarray:
    """
    Leading orthonormal columns spanning the column space of a tall matrix.

    :raises ShapeMismatch: if ``a`` is wide or ``columns`` exceeds its column count.
    """
    arr = as_matrix(a, "basis input")
    rows, cols = arr.shape
    if rows < cols:
        raise ShapeMismatch("basis input must be tall, got shape {}".format(arr.shape))
    if columns is None:
        columns = cols
    if columns > cols:
        raise ShapeMismatch("can not extract {} columns from {}".format(columns, cols))
    return qr_decompose(arr).q[:, :columns]


def pseudoinverse(a) -> np.ndarray:
    """
    Moore-Penrose pseudoinverse via the SVD.

    Singular values at or below ``max(rows, cols) * eps * sigma_max`` are treated as zero.
    """
    arr = as_matrix(a, "pseudoinverse input")
    u, s, vt = spla.svd(arr, full_matrices=False, lapack_driver="gesvd")
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((arr.shape[1], arr.shape[0]))
    cutoff = max(arr.shape) * EPS * s[0]
    keep = s > cutoff
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv[np.newaxis, :]) @ u.T


def shrink(a, tau: float) -> np.ndarray:
    """
    Soft-thresholding ``sign(a) * max(|a| - tau, 0)``, applied elementwise.

    :raises NegativeThreshold: if ``tau`` is negative.
    """
    if tau < 0:
        raise NegativeThreshold("shrinkage threshold must be >= 0, got {}".format(tau))
    arr = as_matrix(a, "shrink input")
    return np.sign(arr) * np.maximum(np.abs(arr) - tau, 0.0)


def split_signs(a) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split ``a`` into nonnegative parts with ``pos - neg == a`` and disjoint supports.
    """
    arr = as_matrix(a, "sign split input")
    pos = (np.abs(arr) + arr) / 2.0
    neg = (np.abs(arr) - arr) / 2.0
    return pos, neg


def is_orthonormal(a: np.ndarray, tol: float = 1e-8) -> bool:
    """``True`` when the columns of ``a`` are orthonormal within ``tol`` (Frobenius)."""
    gram = a.T @ a
    return bool(np.linalg.norm(gram - np.eye(gram.shape[0])) <= tol)


def principal_rotation(y) -> np.ndarray:
    """
    For a wide ``y``, the orthogonal ``w`` such that the rows of ``w.T @ y`` are orthogonal
    with nonincreasing norms, each row signed so its largest magnitude entry is positive.
    """
    arr = as_matrix(y, "rotation input")
    w, _, _ = spla.svd(arr, full_matrices=False, lapack_driver="gesvd")
    rotated = w.T @ arr
    peaks = rotated[np.arange(rotated.shape[0]), np.argmax(np.abs(rotated), axis=1)]
    signs = np.where(peaks < 0.0, -1.0, 1.0)
    return w * signs
