"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A user-supplied parameter is outside the supported range."""


class ConfigurationError(ValueError):
    """Inconsistent configuration, e.g. an unlabeled boundary facet."""


class DegenerateCellError(ValueError):
    """A geometry map has a non-positive Jacobian determinant."""


class SolverError(RuntimeError):
    """The sparse factorization failed (singular matrix)."""


class AccuracyError(RuntimeError):
    """A solve finished but the residual exceeds the required tolerance."""
