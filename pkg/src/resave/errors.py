"""Exception taxonomy.

Invalid arguments (bad shapes, out-of-range constants, unknown names) raise
plain ``ValueError``.  Conditions that arise from the *data* rather than the
call — too few rows, a singular covariance, an eigensolve that will not
converge — get their own types below so callers can count or skip them
without masking genuine bugs.
"""


class EstimationError(Exception):
    """Base class for data- or numerics-driven estimation failures."""


class NoDataError(EstimationError):
    """An operation that needs at least one absorbed observation got none."""


class InsufficientDataError(EstimationError):
    """Fewer observations than the operation's stated minimum."""


class SingularCovarianceError(EstimationError):
    """Covariance (numerically) singular: smallest eigenvalue below floor.

    ``index`` is the position of the offending eigenvalue in the descending
    eigenvalue ordering; ``value`` is the eigenvalue itself.
    """

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class ConvergenceError(EstimationError):
    """An iterative numerical routine hit its iteration cap."""


class EmptyDatasetError(EstimationError):
    """A data source yielded zero usable rows."""


class UndefinedForObservationError(EstimationError):
    """A per-observation statistic is undefined for this observation."""


class SchemaError(Exception):
    """A data source does not match the requested column layout."""
