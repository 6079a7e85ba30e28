import numpy as np

from delmar.admm.base import BaseLayerSolver, LayerFactor, check_shapes, effective_target
from delmar.kernels import as_matrix, pseudoinverse


def update_x_exact(target, f: LayerFactor, beta: float) -> np.ndarray:
    """``X = (S - e/beta) @ pinv(Y)``, the minimizer of the X subproblem."""
    s = as_matrix(target, "target")
    check_shapes(s, f)
    return effective_target(s, f, beta) @ pseudoinverse(f.y)


def update_y_exact(target, f: LayerFactor, beta: float) -> np.ndarray:
    """``Y = pinv(X) @ (S - e/beta)``, the minimizer of the Y subproblem."""
    s = as_matrix(target, "target")
    check_shapes(s, f)
    return pseudoinverse(f.x) @ effective_target(s, f, beta)


class ExactLayerSolver(BaseLayerSolver):
    mode = "exact"

    def update_x(self, target: np.ndarray, f: LayerFactor) -> np.ndarray:
        return update_x_exact(target, f, self.config.beta)

    def update_y(self, target: np.ndarray, f: LayerFactor) -> np.ndarray:
        return update_y_exact(target, f, self.config.beta)


solver_class = ExactLayerSolver
