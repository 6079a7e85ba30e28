"""
Matrix files and run reports.

Two matrix formats are understood:

* CSV: a ``rows,cols`` header line, then ``rows`` lines of ``cols`` comma separated values.
* DMAT: the magic bytes ``DMAT``, rows and cols as little-endian unsigned 32-bit integers,
  then ``rows * cols`` little-endian float64 values in row-major order.

Readers pick the format from the file content, writers from the file extension.
"""
import json
import logging
import os
import struct
from typing import Any, Dict, List, Optional

import numpy as np

from delmar import __version__
from delmar.admm import ConvergenceTrace
from delmar.exceptions import (
    DimensionMismatch,
    InputError,
    MalformedHeader,
    NonFiniteValue,
    ShapeMismatch,
)
from delmar.metrics import SimilarityReport, nonzero_fraction
from delmar.pipeline import LayerStack, layer_residuals
from delmar.utils import matrix_digest

logger = logging.getLogger("delmar")

MAGIC = b"DMAT"
HEADER = struct.Struct("<4sII")
CSV_EXTENSIONS = (".csv", ".txt")


def _check_finite(matrix: np.ndarray, path: str) -> None:
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteValue("{} holds NaN or Inf values".format(path))


def read_matrix(path: str) -> np.ndarray:
    """
    :raises MalformedHeader: if the header can not be parsed.
    :raises DimensionMismatch: if the body does not hold exactly ``rows * cols`` values.
    :raises NonFiniteValue: if any value is NaN or Inf.
    """
    with open(path, "rb") as f:
        payload = f.read()
    if payload[: len(MAGIC)] == MAGIC:
        matrix = _decode_binary(payload, path)
    else:
        matrix = _decode_csv(payload, path)
    _check_finite(matrix, path)
    logger.debug("Read %s matrix from %s", matrix.shape, path)
    return matrix


def _decode_binary(payload: bytes, path: str) -> np.ndarray:
    if len(payload) < HEADER.size:
        raise MalformedHeader("{} is too short for a DMAT header".format(path))
    _, rows, cols = HEADER.unpack_from(payload)
    if rows < 1 or cols < 1:
        raise MalformedHeader("{} declares an empty {}x{} matrix".format(path, rows, cols))
    body = payload[HEADER.size :]
    expected = rows * cols * 8
    if len(body) != expected:
        raise DimensionMismatch(
            "{} declares {}x{} ({} bytes) but holds {} bytes".format(
                path, rows, cols, expected, len(body)
            )
        )
    return np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(rows, cols)


def _decode_csv(payload: bytes, path: str) -> np.ndarray:
    try:
        lines = payload.decode("ascii").splitlines()
    except UnicodeDecodeError:
        raise MalformedHeader("{} is neither DMAT nor ASCII CSV".format(path))
    lines = [line.strip() for line in lines if line.strip()]
    if not lines:
        raise MalformedHeader("{} is empty".format(path))
    try:
        rows, cols = (int(token) for token in lines[0].split(","))
    except ValueError:
        raise MalformedHeader("{} must start with a 'rows,cols' header".format(path))
    if rows < 1 or cols < 1:
        raise MalformedHeader("{} declares an empty {}x{} matrix".format(path, rows, cols))

    body = lines[1:]
    if len(body) != rows:
        raise DimensionMismatch("{} declares {} rows but holds {}".format(path, rows, len(body)))
    matrix = np.empty((rows, cols))
    for i, line in enumerate(body):
        tokens = line.split(",")
        if len(tokens) != cols:
            raise DimensionMismatch(
                "{} row {} holds {} values, expected {}".format(path, i + 1, len(tokens), cols)
            )
        try:
            matrix[i] = [float(token) for token in tokens]
        except ValueError:
            raise InputError("{} row {} holds a value that is not a number".format(path, i + 1))
    return matrix


def write_matrix(path: str, matrix, fmt: Optional[str] = None) -> None:
    """
    Write ``matrix`` as CSV when ``fmt`` is ``"csv"`` or the extension is ``.csv``/``.txt``,
    else as DMAT. CSV values carry 17 significant digits, enough to read back exactly.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ShapeMismatch("can only write non-empty 2-D matrices, got {}".format(matrix.shape))
    _check_finite(matrix, path)
    if fmt is None:
        fmt = "csv" if os.path.splitext(path)[1].lower() in CSV_EXTENSIONS else "dmat"
    rows, cols = matrix.shape
    if fmt == "csv":
        with open(path, "w") as f:
            f.write("{},{}\n".format(rows, cols))
            for row in matrix:
                f.write(",".join("{:.17g}".format(value) for value in row))
                f.write("\n")
    elif fmt == "dmat":
        with open(path, "wb") as f:
            f.write(HEADER.pack(MAGIC, rows, cols))
            f.write(np.ascontiguousarray(matrix, dtype="<f8").tobytes())
    else:
        raise InputError("Unknown matrix format {}, only csv and dmat are supported".format(fmt))
    logger.debug("Wrote %s matrix to %s", matrix.shape, path)


class RunReport:
    """
    Everything needed to audit and repeat one decomposition.

    All fields but ``wall_time_ms`` are deterministic for a given signal and configuration.
    """

    FIELDS = (
        "version",
        "input_digest",
        "input_shape",
        "config",
        "depth",
        "ranks",
        "per_layer_residuals",
        "iterations",
        "terminations",
        "background_density",
        "mbp_applied",
        "metrics",
        "wall_time_ms",
    )

    def __init__(self, **fields) -> None:
        missing = set(self.FIELDS) - set(fields) - {"version", "metrics", "wall_time_ms"}
        if missing:
            raise InputError("report misses fields: {}".format(", ".join(sorted(missing))))
        unknown = set(fields) - set(self.FIELDS)
        if unknown:
            raise InputError("report has unknown fields: {}".format(", ".join(sorted(unknown))))
        self.version = fields.get("version", __version__)  # type: str
        self.input_digest = fields["input_digest"]  # type: str
        self.input_shape = list(fields["input_shape"])  # type: List[int]
        self.config = dict(fields["config"])  # type: Dict[str, Any]
        self.depth = int(fields["depth"])
        self.ranks = [int(r) for r in fields["ranks"]]
        self.per_layer_residuals = list(fields["per_layer_residuals"])  # type: List[Dict[str, Any]]
        self.iterations = [int(i) for i in fields["iterations"]]
        self.terminations = list(fields["terminations"])  # type: List[str]
        self.background_density = [float(d) for d in fields["background_density"]]
        self.mbp_applied = bool(fields["mbp_applied"])
        self.metrics = fields.get("metrics")  # type: Optional[Dict[str, Any]]
        self.wall_time_ms = dict(fields.get("wall_time_ms") or {})  # type: Dict[str, float]

    @classmethod
    def from_run(
        cls,
        stack: LayerStack,
        traces: List[ConvergenceTrace],
        config: Dict[str, Any],
        wall_time_ms: Optional[Dict[str, float]] = None,
        metrics: Optional[SimilarityReport] = None,
    ) -> "RunReport":
        return cls(
            input_digest=matrix_digest(stack.source),
            input_shape=list(stack.source_shape),
            config=config,
            depth=stack.depth,
            ranks=stack.ranks,
            per_layer_residuals=layer_residuals(stack),
            iterations=[trace.iterations for trace in traces],
            terminations=[trace.termination for trace in traces],
            background_density=[nonzero_fraction(layer.z) for layer in stack.layers],
            mbp_applied=stack.mbp_applied,
            metrics=metrics.to_dict() if metrics is not None else None,
            wall_time_ms=wall_time_ms,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path: str) -> "RunReport":
        with open(path, "r") as f:
            return cls(**json.load(f))
