"""Exception types shared across the package."""


class GridfluxError(Exception):
    """Base class for all package errors."""


class ConfigError(GridfluxError, ValueError):
    """Invalid or inconsistent configuration value."""


class DimensionMismatch(GridfluxError, ValueError):
    """Array shapes that must agree do not."""


class EmptyNullSpace(GridfluxError):
    """The matrix has full row rank at the requested tolerance."""


class NotHurwitz(GridfluxError):
    """A matrix expected to be Hurwitz has an eigenvalue with Re >= 0."""


class SolverSingular(GridfluxError):
    """A linear solve was singular or numerically ill-conditioned."""


class NotSymmetric(GridfluxError, ValueError):
    """A matrix expected to be symmetric is not."""


class DisconnectedTopology(GridfluxError, ValueError):
    """The internal network graph of an area is not connected."""


class InvalidParams(GridfluxError, ValueError):
    """Physical parameters outside their admissible range."""


class _TimedError(GridfluxError):
    def __init__(self, t, message="", trajectory=None):
        self.t = float(t)
        self.trajectory = trajectory
        super().__init__(f"{message} at t={self.t:.10g}" if message else f"t={self.t:.10g}")


class GuardTripped(_TimedError):
    """A guard predicate failed during integration.

    ``trajectory`` holds the samples computed before the trip, if any.
    """


class NonFinite(_TimedError):
    """The integrated state became NaN or infinite."""
