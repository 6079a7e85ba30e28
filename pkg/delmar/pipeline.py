"""
Deep factorization driver.

Layer 1 factors the signal at a chosen rank. Every further layer factors the features of
the layer above it at the rank the rank reduction operator reads off those features, until
that rank drops to 1 or the layer cap is hit. Each solved layer is rotated to its principal
orientation, so its feature rows come out orthogonal and sorted by strength. The finished
stack is then refined by matrix backpropagation.
"""
import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from delmar.admm import AdmmConfig, ConvergenceTrace, LayerFactor, solve_layer
from delmar.exceptions import ConfigurationError, DegenerateInput, LayerOutOfRange
from delmar.kernels import as_matrix, principal_rotation
from delmar.rro import RankDecision, estimate_rank

logger = logging.getLogger("delmar")

DEFAULT_MAX_LAYERS = 8


class LayerStack:
    """
    Ordered layers ``1..depth`` with the rank decisions that sized layers ``2..depth``.

    ``source`` is the signal the stack was fitted to. ``mbp_states`` holds the per-layer
    backpropagation diagnostics of the last sweep once ``mbp_applied`` is set.
    """

    def __init__(
        self,
        layers: List[LayerFactor],
        source: np.ndarray,
        config_snapshot: AdmmConfig,
        rank_decisions: Optional[List[RankDecision]] = None,
        mbp_applied: bool = False,
        mbp_states: Optional[list] = None,
    ) -> None:
        self.layers = list(layers)
        self.source = source
        self.config_snapshot = config_snapshot
        self.rank_decisions = list(rank_decisions or [])
        self.mbp_applied = mbp_applied
        self.mbp_states = list(mbp_states or [])

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def ranks(self) -> List[int]:
        return [layer.rank for layer in self.layers]

    @property
    def source_shape(self) -> Tuple[int, int]:
        return self.source.shape

    def layer(self, k: int) -> LayerFactor:
        if k < 1 or k > self.depth:
            raise LayerOutOfRange("layer must be in 1..{}, got {}".format(self.depth, k))
        return self.layers[k - 1]

    def target(self, k: int) -> np.ndarray:
        """The matrix layer ``k`` was fitted to: the signal for layer 1, else ``Y_{k-1}``."""
        self.layer(k)
        return self.source if k == 1 else self.layers[k - 2].y

    def replace(self, **changes) -> "LayerStack":
        params = {
            "layers": self.layers,
            "source": self.source,
            "config_snapshot": self.config_snapshot,
            "rank_decisions": self.rank_decisions,
            "mbp_applied": self.mbp_applied,
            "mbp_states": self.mbp_states,
        }
        params.update(changes)
        return LayerStack(**params)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "depth": self.depth,
            "ranks": self.ranks,
            "source_shape": list(self.source_shape),
            "mbp_applied": self.mbp_applied,
            "config": self.config_snapshot.to_dict(),
            "rank_decisions": [decision.to_dict() for decision in self.rank_decisions],
        }

    def __repr__(self) -> str:
        return "LayerStack(depth={}, ranks={}, source_shape={})".format(
            self.depth, self.ranks, self.source_shape
        )


def orient_layer(layer: LayerFactor) -> LayerFactor:
    """Rotate (X, Y) to (X W, W^T Y); the product and the sparse part are unchanged."""
    w = principal_rotation(layer.y)
    return layer.replace(x=layer.x @ w, y=w.T @ layer.y)


def default_initial_rank(shape: Tuple[int, int]) -> int:
    return max(1, int(round(min(shape) / 4.0)))


def decompose(
    s,
    config: Optional[AdmmConfig] = None,
    initial_rank: Optional[int] = None,
    max_layers: int = DEFAULT_MAX_LAYERS,
    mbp: bool = True,
    mbp_sweeps: int = 1,
) -> Tuple[LayerStack, List[ConvergenceTrace]]:
    """
    Factor ``s`` into a stack of layers with automatic depth and rank discovery.

    :param initial_rank: rank of layer 1, ``round(min(m, n) / 4)`` when omitted.
    :param max_layers: hard cap on the depth.
    :param mbp: run matrix backpropagation on the finished stack.
    :param mbp_sweeps: number of backward sweeps when ``mbp`` is set.
    :raises DegenerateInput: if the smaller dimension of ``s`` is below 3.
    :raises RankTooLarge: if ``initial_rank`` is not below both dimensions.
    """
    signal = as_matrix(s, "signal")
    if min(signal.shape) < 3:
        raise DegenerateInput("signal must be at least 3 x 3, got {}".format(signal.shape))
    if max_layers < 1:
        raise ConfigurationError("max_layers must be >= 1, got {}".format(max_layers))
    if mbp and mbp_sweeps < 1:
        raise ConfigurationError("mbp_sweeps must be >= 1, got {}".format(mbp_sweeps))
    config = config or AdmmConfig()
    if initial_rank is None:
        initial_rank = default_initial_rank(signal.shape)

    logger.info(
        "Decomposing %s signal, initial rank %d, max %d layers, %s mode",
        signal.shape,
        initial_rank,
        max_layers,
        config.mode,
    )
    layer, trace = solve_layer(signal, initial_rank, config, layer_index=1)
    layers = [orient_layer(layer)]
    traces = [trace]
    decisions = []  # type: List[RankDecision]

    while len(layers) < max_layers:
        features = layers[-1].y
        if min(features.shape) < 2:
            break
        decision = estimate_rank(features)
        decisions.append(decision)
        if decision.estimated_rank <= 1:
            break
        layer, trace = solve_layer(
            features, decision.estimated_rank, config, layer_index=len(layers) + 1
        )
        layers.append(orient_layer(layer))
        traces.append(trace)

    stack = LayerStack(layers, signal, config, rank_decisions=decisions)
    logger.info("Discovered depth %d with ranks %s", stack.depth, stack.ranks)

    if mbp:
        # Imported here, backpropagation works on LayerStack instances.
        from delmar.mbp import backpropagate

        stack = backpropagate(stack, sweeps=mbp_sweeps)
    return stack, traces


def reconstruct(stack: LayerStack, upto_layer: int) -> np.ndarray:
    """``X_1 @ ... @ X_k @ Y_k + Z_1`` for ``k = upto_layer``."""
    stack.layer(upto_layer)
    weights = stack.layers[0].x
    for layer in stack.layers[1:upto_layer]:
        weights = weights @ layer.x
    return weights @ stack.layers[upto_layer - 1].y + stack.layers[0].z


def hierarchy_features(stack: LayerStack, layer: int) -> np.ndarray:
    return stack.layer(layer).y.copy()


def layer_residuals(stack: LayerStack) -> List[Dict[str, float]]:
    """
    For each layer, the fit residual against its own target and the relative error of
    :func:`reconstruct` against the signal.
    """
    source_norm = float(np.linalg.norm(stack.source)) or 1.0
    rows = []
    for k, layer in enumerate(stack.layers, start=1):
        target = stack.target(k)
        target_norm = float(np.linalg.norm(target)) or 1.0
        rows.append(
            {
                "layer": k,
                "fit_residual": float(np.linalg.norm(layer.product() + layer.z - target))
                / target_norm,
                "reconstruction_error": float(np.linalg.norm(reconstruct(stack, k) - stack.source))
                / source_norm,
            }
        )
    return rows
