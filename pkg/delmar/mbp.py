"""
Matrix backpropagation.

A backward sweep from the deepest layer to the first refines every feature matrix ``Y_k``
against the signal with its background removed, ``T = S - Z_1``, through the composed
dictionary ``X_1 @ ... @ X_k``. Signed features are split into nonnegative parts and
updated multiplicatively, so every update keeps zeros at zero, keeps signs, and never
increases the fit ``||W @ Y - T||``. Weights and backgrounds are left as they are.
"""
import logging
from typing import TYPE_CHECKING, List

import numpy as np

from delmar.exceptions import ShapeMismatch
from delmar.kernels import as_matrix, pseudoinverse, split_signs

if TYPE_CHECKING:  # pragma: nocoverage
    from delmar.pipeline import LayerStack

logger = logging.getLogger("delmar")

EPS_DENOMINATOR = 1e-12


class MbpState:
    """
    Diagnostics of one layer's backward step.

    ``psi`` is the product of the weights above the layer, ``y_hat`` the feature estimate
    passed down from the layer below it and ``d`` the mixing estimate
    ``pinv(psi) @ T @ pinv(y_hat)``. ``d`` is reported only, it does not enter the update.
    """

    __slots__ = ("psi", "y_hat", "d", "layer_index")

    def __init__(self, psi, y_hat, d, layer_index: int) -> None:
        self.psi = psi  # type: np.ndarray
        self.y_hat = y_hat  # type: np.ndarray
        self.d = d  # type: np.ndarray
        self.layer_index = layer_index

    def __repr__(self) -> str:
        return "MbpState(layer_index={}, psi={}, y_hat={})".format(
            self.layer_index, self.psi.shape, self.y_hat.shape
        )


def compose_psi(stack: "LayerStack", k: int) -> np.ndarray:
    """``X_1 @ ... @ X_{k-1}``, the ``m x m`` identity for ``k == 1``."""
    stack.layer(k)
    if k == 1:
        return np.eye(stack.source_shape[0])
    psi = stack.layers[0].x.copy()
    for layer in stack.layers[1 : k - 1]:
        psi = psi @ layer.x
    return psi


def _fit(dictionary: np.ndarray, target: np.ndarray, y: np.ndarray) -> float:
    return float(np.linalg.norm(dictionary @ y - target))


def mbp_update_y(psi, target, y_hat) -> np.ndarray:
    """
    One multiplicative step on ``min ||psi @ Y - T||`` started from ``y_hat``.

    ``Y = P - N`` with ``P, N >= 0`` is fitted through the dictionary ``[psi, -psi]``.
    With ``A = psi.T @ T`` and ``G = psi.T @ psi`` split into positive and negative parts::

        P <- P * sqrt((A+ + G- P + G+ N) / (A- + G+ P + G- N))
        N <- N * sqrt((A- + G+ P + G- N) / (A+ + G- P + G+ N))

    :raises ShapeMismatch: if ``psi``, ``target`` and ``y_hat`` do not chain.
    """
    psi = as_matrix(psi, "psi")
    target = as_matrix(target, "mbp target")
    y_hat = as_matrix(y_hat, "y_hat")
    if psi.shape[0] != target.shape[0] or psi.shape[1] != y_hat.shape[0]:
        raise ShapeMismatch(
            "psi {} and y_hat {} do not chain to target {}".format(
                psi.shape, y_hat.shape, target.shape
            )
        )
    if y_hat.shape[1] != target.shape[1]:
        raise ShapeMismatch(
            "y_hat has {} columns but target has {}".format(y_hat.shape[1], target.shape[1])
        )

    a_pos, a_neg = split_signs(psi.T @ target)
    g_pos, g_neg = split_signs(psi.T @ psi)
    pos, neg = split_signs(y_hat)

    grow = a_pos + g_neg @ pos + g_pos @ neg
    shrink_ = a_neg + g_pos @ pos + g_neg @ neg
    pos = pos * np.sqrt(grow / np.maximum(shrink_, EPS_DENOMINATOR))
    neg = neg * np.sqrt(shrink_ / np.maximum(grow, EPS_DENOMINATOR))
    return pos - neg


def _sweep(stack: "LayerStack", target: np.ndarray) -> "LayerStack":
    layers = list(stack.layers)
    states = [None] * stack.depth  # type: List[MbpState]
    y_hat = layers[-1].y

    for k in range(stack.depth, 0, -1):
        layer = layers[k - 1]
        psi = compose_psi(stack, k)
        dictionary = psi @ layer.x
        if k < stack.depth:
            y_hat = layers[k].x @ layers[k].y

        before = _fit(dictionary, target, layer.y)
        # the estimate from below only replaces the current features when it fits no worse
        start = y_hat if _fit(dictionary, target, y_hat) <= before else layer.y
        refined = mbp_update_y(dictionary, target, start)
        d = pseudoinverse(psi) @ target @ pseudoinverse(y_hat)
        states[k - 1] = MbpState(psi, y_hat, d, k)
        logger.debug(
            "Backpropagation layer %d: fit %.6e -> %.6e",
            k,
            before,
            _fit(dictionary, target, refined),
        )
        layers[k - 1] = layer.replace(y=refined)

    return stack.replace(layers=layers, mbp_applied=True, mbp_states=states)


def backpropagate(stack: "LayerStack", sweeps: int = 1) -> "LayerStack":
    """
    Refine the features of every layer in ``sweeps`` backward passes.

    Returns a new stack; the input stack is left untouched.
    """
    target = stack.source - stack.layers[0].z
    for _ in range(sweeps):
        stack = _sweep(stack, target)
    logger.info("Applied %d backpropagation sweep(s) to %d layers", sweeps, stack.depth)
    return stack
