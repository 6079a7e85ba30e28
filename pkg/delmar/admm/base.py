import logging
import numbers
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from delmar.exceptions import ConfigurationError, NonFiniteIterate, RankTooLarge, ShapeMismatch
from delmar.kernels import as_matrix, shrink
from delmar.utils import make_rng

logger = logging.getLogger("delmar")

MODES = ("exact", "accelerated")

TERMINATION_TOLERANCE = "tolerance"
TERMINATION_MAX_ITER = "max_iter"


class AdmmConfig:
    """
    Parameters of the single-layer solver. Instances are frozen once built.

    Fields:

    ``beta``:
        Penalty parameter, must be greater than 1. The background trade-off is ``1/beta``.
    ``eta``:
        Multiplier step length, at least 1.
    ``max_iter``:
        Upper bound on outer iterations per layer.
    ``tol``:
        Relative primal residual that stops the iteration.
    ``mode``:
        ``"exact"`` for pseudoinverse updates, ``"accelerated"`` for QR projections.
    ``seed``:
        64-bit unsigned seed for factor initialization.
    """

    def __init__(
        self,
        *,
        beta: float = 10.0,
        eta: float = 1.6,
        max_iter: int = 500,
        tol: float = 1e-5,
        mode: str = "accelerated",
        seed: int = 0
    ) -> None:
        super().__setattr__("_mutable", True)

        self.beta = float(beta)
        self.eta = float(eta)
        self.max_iter = max_iter
        self.tol = float(tol)
        self.mode = mode
        self.seed = seed
        self._validate()
        super().__setattr__("_mutable", False)

    def _validate(self) -> None:
        if not np.isfinite(self.beta) or self.beta <= 1.0:
            raise ConfigurationError("beta must be > 1, got {}".format(self.beta))
        if not np.isfinite(self.eta) or self.eta < 1.0:
            raise ConfigurationError("eta must be >= 1, got {}".format(self.eta))
        if not np.isfinite(self.tol) or self.tol <= 0.0:
            raise ConfigurationError("tol must be > 0, got {}".format(self.tol))
        if isinstance(self.max_iter, bool) or not isinstance(self.max_iter, numbers.Integral) or self.max_iter < 1:
            raise ConfigurationError("max_iter must be an integer >= 1, got {}".format(self.max_iter))
        if self.mode not in MODES:
            raise ConfigurationError(
                "Unknown solver mode {}, only {} are supported".format(self.mode, ", ".join(MODES))
            )
        if isinstance(self.seed, bool) or not isinstance(self.seed, numbers.Integral):
            raise ConfigurationError("seed must be an integer, got {!r}".format(self.seed))
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigurationError("seed must fit in 64 unsigned bits, got {}".format(self.seed))

    def __setattr__(self, attr, value):
        if not getattr(self, "_mutable", False):
            raise AttributeError(attr)
        return super().__setattr__(attr, value)

    def replace(self, **changes) -> "AdmmConfig":
        params = self.to_dict()
        params.update(changes)
        return AdmmConfig(**params)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "eta": self.eta,
            "max_iter": int(self.max_iter),
            "tol": self.tol,
            "mode": self.mode,
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, params: Dict[str, Any]) -> "AdmmConfig":
        unknown = set(params) - set(cls().to_dict())
        if unknown:
            raise ConfigurationError("Unknown solver options: {}".format(", ".join(sorted(unknown))))
        return cls(**params)

    def __eq__(self, other) -> bool:
        return isinstance(other, AdmmConfig) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.to_dict().items())))

    def __repr__(self) -> str:
        return "AdmmConfig({})".format(
            ", ".join("{}={!r}".format(k, v) for k, v in self.to_dict().items())
        )


class LayerFactor:
    """
    One layer of the stack: ``x`` (m x h), ``y`` (h x n), background ``z`` and multiplier
    ``e`` (both m x n).
    """

    __slots__ = ("x", "y", "z", "e", "layer_index")

    def __init__(self, x, y, z, e, layer_index: int = 1) -> None:
        self.x = x  # type: np.ndarray
        self.y = y  # type: np.ndarray
        self.z = z  # type: np.ndarray
        self.e = e  # type: np.ndarray
        self.layer_index = layer_index
        if x.shape[1] != y.shape[0]:
            raise ShapeMismatch("x has {} columns but y has {} rows".format(x.shape[1], y.shape[0]))
        target_shape = (x.shape[0], y.shape[1])
        if z.shape != target_shape or e.shape != target_shape:
            raise ShapeMismatch(
                "z {} and e {} must have shape {}".format(z.shape, e.shape, target_shape)
            )

    @property
    def rank(self) -> int:
        return self.x.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.x.shape[0], self.y.shape[1]

    def product(self) -> np.ndarray:
        return self.x @ self.y

    def replace(self, **changes) -> "LayerFactor":
        params = {name: getattr(self, name) for name in self.__slots__}
        params.update(changes)
        return LayerFactor(**params)

    def __repr__(self) -> str:
        return "LayerFactor(layer_index={}, shape={}, rank={})".format(
            self.layer_index, self.shape, self.rank
        )


class ConvergenceTrace:
    __slots__ = ("layer_index", "primal_residuals", "lagrangian_values", "termination")

    def __init__(self, layer_index: int = 1) -> None:
        self.layer_index = layer_index
        self.primal_residuals = []  # type: List[float]
        self.lagrangian_values = []  # type: List[float]
        self.termination = None  # type: Optional[str]

    @property
    def iterations(self) -> int:
        return len(self.primal_residuals)

    @property
    def final_residual(self) -> float:
        return self.primal_residuals[-1] if self.primal_residuals else float("nan")

    def record(self, residual: float, lagrangian: float) -> None:
        self.primal_residuals.append(float(residual))
        self.lagrangian_values.append(float(lagrangian))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer_index": self.layer_index,
            "iterations": self.iterations,
            "termination": self.termination,
            "final_residual": self.final_residual,
            "primal_residuals": list(self.primal_residuals),
            "lagrangian_values": list(self.lagrangian_values),
        }


def check_shapes(target: np.ndarray, f: LayerFactor) -> None:
    if target.shape != f.shape:
        raise ShapeMismatch(
            "layer factors reconstruct shape {} but target has shape {}".format(f.shape, target.shape)
        )


def evaluate_lagrangian(target, f: LayerFactor, beta: float) -> float:
    """
    ``(beta/2)*||XY - S||^2 + <XY - S, e> + (1/beta)*||Z||_1``.
    """
    s = as_matrix(target, "target")
    check_shapes(s, f)
    gap = f.product() - s
    return float(
        0.5 * beta * np.sum(gap * gap) + np.sum(gap * f.e) + np.sum(np.abs(f.z)) / beta
    )


def update_z(target, f: LayerFactor, beta: float) -> np.ndarray:
    """
    Closed-form background step ``shrink(S - XY - e/beta, 1/beta**2)``.
    """
    s = as_matrix(target, "target")
    check_shapes(s, f)
    return shrink(s - f.product() - f.e / beta, 1.0 / beta ** 2)


def update_multiplier(target, f: LayerFactor, config: AdmmConfig) -> np.ndarray:
    s = as_matrix(target, "target")
    check_shapes(s, f)
    return f.e + config.eta * config.beta * (f.product() + f.z - s)


def effective_target(target: np.ndarray, f: LayerFactor, beta: float) -> np.ndarray:
    return target - f.e / beta


def _ensure_finite(name: str, value: np.ndarray, iteration: int, layer_index: int) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise NonFiniteIterate(
            "{} update produced non-finite values at iteration {} of layer {}".format(
                name, iteration, layer_index
            )
        )
    return value


class BaseLayerSolver:
    """
    Alternating X, Y, Z and multiplier updates for one layer.

    Subclasses provide :meth:`update_x` and :meth:`update_y`; the background and multiplier
    steps are shared by every mode.
    """

    mode = ""

    def __init__(self, config: AdmmConfig) -> None:
        self.config = config

    def update_x(self, target: np.ndarray, f: LayerFactor) -> np.ndarray:
        raise NotImplementedError()  # pragma: nocoverage

    def update_y(self, target: np.ndarray, f: LayerFactor) -> np.ndarray:
        raise NotImplementedError()  # pragma: nocoverage

    def initialize(self, target: np.ndarray, h: int, layer_index: int = 1) -> LayerFactor:
        m, n = target.shape
        x = make_rng(self.config.seed, layer_index, "x_init").standard_normal((m, h))
        y = make_rng(self.config.seed, layer_index, "y_init").standard_normal((h, n))
        return LayerFactor(x, y, np.zeros((m, n)), np.zeros((m, n)), layer_index)

    def step(self, target: np.ndarray, f: LayerFactor, iteration: int = 1) -> LayerFactor:
        """One outer iteration in the fixed order X, Y, Z, e."""
        beta = self.config.beta
        k = f.layer_index
        f = f.replace(x=_ensure_finite("x", self.update_x(target, f), iteration, k))
        f = f.replace(y=_ensure_finite("y", self.update_y(target, f), iteration, k))
        f = f.replace(z=_ensure_finite("z", update_z(target, f, beta), iteration, k))
        f = f.replace(e=_ensure_finite("e", update_multiplier(target, f, self.config), iteration, k))
        return f

    def solve(
        self, target, h: int, layer_index: int = 1, init: Optional[LayerFactor] = None
    ) -> Tuple[LayerFactor, ConvergenceTrace]:
        s = as_matrix(target, "layer target")
        if h < 1 or h >= min(s.shape):
            raise RankTooLarge(
                "layer rank must satisfy 1 <= h < {}, got {}".format(min(s.shape), h)
            )
        if init is None:
            f = self.initialize(s, h, layer_index)
        else:
            check_shapes(s, init)
            if init.rank != h:
                raise ShapeMismatch("initial factors have rank {}, expected {}".format(init.rank, h))
            f = init.replace(layer_index=layer_index)

        s_norm = float(np.linalg.norm(s))
        scale = s_norm if s_norm > 0.0 else 1.0
        trace = ConvergenceTrace(layer_index)
        logger.debug(
            "Solving layer %d: target %s, rank %d, mode %s", layer_index, s.shape, h, self.mode
        )
        for iteration in range(1, self.config.max_iter + 1):
            f = self.step(s, f, iteration)
            residual = float(np.linalg.norm(f.product() + f.z - s)) / scale
            trace.record(residual, evaluate_lagrangian(s, f, self.config.beta))
            if residual <= self.config.tol:
                trace.termination = TERMINATION_TOLERANCE
                break
        else:
            trace.termination = TERMINATION_MAX_ITER
            logger.warning(
                "Layer %d stopped at max_iter=%d with relative residual %.3e (tol %.1e)",
                layer_index,
                self.config.max_iter,
                trace.final_residual,
                self.config.tol,
            )
        logger.debug(
            "Layer %d finished after %d iterations (%s), residual %.3e",
            layer_index,
            trace.iterations,
            trace.termination,
            trace.final_residual,
        )
        return f, trace
