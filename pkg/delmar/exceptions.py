__all__ = (
    "BaseDelmarException",
    "ConfigurationError",
    "InputError",
    "NonFiniteInput",
    "NegativeThreshold",
    "VectorTooShort",
    "ZeroPrefix",
    "DivisionByZero",
    "MatrixTooSmall",
    "ShapeMismatch",
    "RankTooLarge",
    "DegenerateInput",
    "LayerOutOfRange",
    "LengthMismatch",
    "EmptySupport",
    "TooFewObservations",
    "ZeroSignal",
    "InvalidSpec",
    "MalformedHeader",
    "DimensionMismatch",
    "NonFiniteValue",
    "NumericalError",
    "NonFiniteIterate",
)


class BaseDelmarException(Exception):
    """
    Base Delmar Exception.

    Every subclass carries a stable ``code`` used in machine-readable error objects
    and the process ``exit_status`` the command line tool reports it with.
    """

    code = "delmar_error"
    exit_status = 1


class ConfigurationError(BaseDelmarException):
    """
    The ConfigurationError exception is raised when a solver or run configuration is invalid.
    """

    code = "configuration_error"
    exit_status = 2


class InputError(BaseDelmarException):
    """
    The InputError is raised when an operation can not be run with given inputs.
    """

    code = "input_error"
    exit_status = 3


class NonFiniteInput(InputError):
    """
    Raised when a matrix handed to an operation holds NaN or Inf.
    """

    code = "non_finite_input"


class NegativeThreshold(InputError):
    """
    Raised when a shrinkage threshold is negative.
    """

    code = "negative_threshold"


class VectorTooShort(InputError):
    """
    Raised when a diagonal statistic needs at least two entries.
    """

    code = "vector_too_short"


class ZeroPrefix(InputError):
    """
    Raised when a cumulative sum used as a divisor is zero.
    """

    code = "zero_prefix"


class DivisionByZero(InputError):
    """
    Raised when a ratio statistic would divide by a zero entry.
    """

    code = "division_by_zero"


class MatrixTooSmall(InputError):
    """
    Raised when rank estimation gets a matrix whose smaller dimension is below 2.
    """

    code = "matrix_too_small"


class ShapeMismatch(InputError):
    """
    Raised when factor shapes do not chain or do not match the target.
    """

    code = "shape_mismatch"


class RankTooLarge(InputError):
    """
    Raised when a layer rank is not strictly below the smaller target dimension.
    """

    code = "rank_too_large"


class DegenerateInput(InputError):
    """
    Raised when a signal matrix is too small to be decomposed.
    """

    code = "degenerate_input"


class LayerOutOfRange(InputError):
    """
    Raised when a layer index falls outside ``1..depth``.
    """

    code = "layer_out_of_range"


class LengthMismatch(InputError):
    """
    Raised when two maps compared elementwise have different lengths.
    """

    code = "length_mismatch"


class EmptySupport(InputError):
    """
    Raised when a distance between supports is asked for an empty support.
    """

    code = "empty_support"


class TooFewObservations(InputError):
    """
    Raised when a signal can not be split into two halves.
    """

    code = "too_few_observations"


class ZeroSignal(InputError):
    """
    Raised when a relative error is asked against an all-zero signal.
    """

    code = "zero_signal"


class InvalidSpec(InputError):
    """
    Raised when a synthetic data specification breaks its invariants.
    """

    code = "invalid_spec"


class MalformedHeader(InputError):
    """
    Raised when a matrix file does not start with a valid header.
    """

    code = "malformed_header"


class DimensionMismatch(InputError):
    """
    Raised when a matrix file body does not hold ``rows * cols`` values.
    """

    code = "dimension_mismatch"


class NonFiniteValue(InputError):
    """
    Raised when a matrix file holds NaN or Inf.
    """

    code = "non_finite_value"


class NumericalError(BaseDelmarException):
    """
    The NumericalError is raised when an iteration breaks down numerically.
    """

    code = "numerical_error"
    exit_status = 4


class NonFiniteIterate(NumericalError):
    """
    Raised when a solver update produces NaN or Inf, usually a sign of bad ``beta``/``eta``.
    """

    code = "non_finite_iterate"
