"""
Orthogonal projection updates.

X is the orthonormal basis of ``(S - e/beta) @ Y.T`` and Y holds the coefficients of
``S - e/beta`` in that basis, so that ``X @ Y`` is the projection ``Q @ Q.T @ (S - e/beta)``
without any pseudoinverse.
"""
import numpy as np

from delmar.admm.base import BaseLayerSolver, LayerFactor, check_shapes, effective_target
from delmar.kernels import as_matrix, is_orthonormal, qr_decompose


def update_x_accelerated(target, f: LayerFactor, beta: float) -> np.ndarray:
    s = as_matrix(target, "target")
    check_shapes(s, f)
    return qr_decompose(effective_target(s, f, beta) @ f.y.T).q[:, : f.rank]


def update_y_accelerated(target, f: LayerFactor, beta: float) -> np.ndarray:
    """
    Coefficients ``X.T @ (S - e/beta)`` for an orthonormal X.

    A non-orthonormal X falls back to the orthonormal factor of ``X.T @ (S - e/beta)``,
    returned with shape ``h x n`` and orthonormal rows.
    """
    s = as_matrix(target, "target")
    check_shapes(s, f)
    coefficients = f.x.T @ effective_target(s, f, beta)
    if is_orthonormal(f.x):
        return coefficients
    qr = qr_decompose(coefficients)
    return qr.q.T if qr.transposed else qr.q


class AcceleratedLayerSolver(BaseLayerSolver):
    mode = "accelerated"

    def update_x(self, target: np.ndarray, f: LayerFactor) -> np.ndarray:
        return update_x_accelerated(target, f, self.config.beta)

    def update_y(self, target: np.ndarray, f: LayerFactor) -> np.ndarray:
        return update_y_accelerated(target, f, self.config.beta)


solver_class = AcceleratedLayerSolver
