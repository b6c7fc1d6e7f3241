"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument violates a documented precondition (shape, range, or consistency)."""


class InfeasibleGeometry(ValueError):
    """The requested subspace configuration cannot exist in the ambient dimension."""


class EmptySliceError(RuntimeError):
    """An observation is inconsistent with the prior: the posterior slice is empty."""


class UnsupportedPriorError(TypeError):
    """The operation is only defined for a single-ellipsoid prior."""


class ConfigError(ValueError):
    """A run configuration is malformed or inconsistent."""


class PartialSampleWarning(UserWarning):
    """A rejection sampler hit its draw budget before collecting the requested samples."""
