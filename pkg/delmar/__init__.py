__version__ = "0.1.0"

from delmar.admm import AdmmConfig, ConvergenceTrace, LayerFactor, solve_layer  # noqa: E402
from delmar.config import RunConfig  # noqa: E402
from delmar.exceptions import BaseDelmarException  # noqa: E402
from delmar.io import RunReport, read_matrix, write_matrix  # noqa: E402
from delmar.mbp import backpropagate  # noqa: E402
from delmar.metrics import (  # noqa: E402
    compare_to_templates,
    relative_error,
    split_half_reproducibility,
)
from delmar.pipeline import LayerStack, decompose, hierarchy_features, reconstruct  # noqa: E402
from delmar.rro import RankDecision, estimate_rank  # noqa: E402
from delmar.synth import GroundTruth, SynthSpec, generate  # noqa: E402

__all__ = [
    "AdmmConfig",
    "BaseDelmarException",
    "ConvergenceTrace",
    "GroundTruth",
    "LayerFactor",
    "LayerStack",
    "RankDecision",
    "RunConfig",
    "RunReport",
    "SynthSpec",
    "backpropagate",
    "compare_to_templates",
    "decompose",
    "estimate_rank",
    "generate",
    "hierarchy_features",
    "read_matrix",
    "reconstruct",
    "relative_error",
    "solve_layer",
    "split_half_reproducibility",
    "write_matrix",
]
