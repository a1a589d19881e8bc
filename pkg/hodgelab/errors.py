class HodgeLabError(Exception):
    """Base exception for hodgelab."""


class InputError(HodgeLabError):
    """Raised for malformed or unusable user input (exit code 1)."""


class ConfigurationError(InputError):
    """Raised for an invalid run configuration."""


class SchemaError(InputError):
    """Raised when a model file does not follow the model schema."""


class ModelLookupError(InputError):
    """Raised for an unknown builtin model name."""


class DimensionError(InputError):
    """Raised when operands live in ambient spaces of different dimension."""


class NumericInputError(InputError):
    """Raised for NaN or infinite entries in numeric input."""


class MetricError(InputError):
    """Raised when a Hermitian metric or Gram matrix is not positive definite."""


class ProductMetricError(MetricError):
    """Raised when a foliated metric is not block-diagonal on the partition."""


class IntegrabilityError(InputError):
    """Raised when structure equations or a splitting fail integrability."""


class AliasingRiskError(InputError):
    """Raised when a grid is too coarse for the requested Fourier bands."""


class PreconditionError(HodgeLabError):
    """Raised when an operation is called outside its preconditions."""


class TheoremViolationError(HodgeLabError):
    """Raised when a proven identity or decomposition fails on a model."""


class SoundnessError(TheoremViolationError):
    """Raised when a fired certificate disagrees with the page engine."""


class InternalConsistencyError(HodgeLabError):
    """Raised when an internal self-check of the engine fails."""


class ConventionError(InternalConsistencyError):
    """Raised when a sign or normalization convention check fails."""


class NumericError(HodgeLabError):
    """Raised when a numerical residual exceeds its tolerance."""


class SymmetryError(NumericError):
    """Raised when an operator is not self-adjoint for the given Gram."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code: 1 for input problems, 2 otherwise."""
    if isinstance(exc, (InputError, PreconditionError)):
        return 1
    return 2
