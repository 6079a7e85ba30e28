import importlib
from typing import Dict, Optional, Tuple, Type

from delmar.admm.accelerated import update_x_accelerated, update_y_accelerated
from delmar.admm.base import (
    MODES,
    TERMINATION_MAX_ITER,
    TERMINATION_TOLERANCE,
    AdmmConfig,
    BaseLayerSolver,
    ConvergenceTrace,
    LayerFactor,
    evaluate_lagrangian,
    update_multiplier,
    update_z,
)
from delmar.admm.exact import update_x_exact, update_y_exact
from delmar.exceptions import ConfigurationError

SOLVER_LOOKUP = {
    "exact": "delmar.admm.exact",
    "accelerated": "delmar.admm.accelerated",
}  # type: Dict[str, str]


def discover_solver_class(mode: str) -> Type[BaseLayerSolver]:
    try:
        module_path = SOLVER_LOOKUP[mode]
    except KeyError:
        raise ConfigurationError("Unknown solver mode: {}".format(mode))
    # Let exception bubble up for transparency
    module = importlib.import_module(module_path)
    try:
        return module.solver_class  # type: ignore
    except AttributeError:
        raise ConfigurationError('Module "{}" does not implement a layer solver'.format(module_path))


def solve_layer(
    target,
    h: int,
    config: AdmmConfig,
    layer_index: int = 1,
    init: Optional[LayerFactor] = None,
) -> Tuple[LayerFactor, ConvergenceTrace]:
    """
    Factor ``target ~ X @ Y + Z`` at rank ``h`` with the solver selected by ``config.mode``.

    ``init`` restarts the iteration from given factors instead of the seeded random start.

    :raises RankTooLarge: if ``h`` is not below both target dimensions.
    :raises NonFiniteIterate: if an update diverges.
    """
    solver = discover_solver_class(config.mode)(config)
    return solver.solve(target, h, layer_index=layer_index, init=init)


__all__ = [
    "MODES",
    "TERMINATION_MAX_ITER",
    "TERMINATION_TOLERANCE",
    "AdmmConfig",
    "BaseLayerSolver",
    "ConvergenceTrace",
    "LayerFactor",
    "discover_solver_class",
    "evaluate_lagrangian",
    "solve_layer",
    "update_multiplier",
    "update_x_accelerated",
    "update_x_exact",
    "update_y_accelerated",
    "update_y_exact",
    "update_z",
]
