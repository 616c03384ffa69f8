"""Exception types raised across the package."""


class MuSweepError(Exception):
    """Base class for all errors raised by musweep."""


class DimensionError(MuSweepError, ValueError):
    """Matrix or vector shapes are inconsistent."""


class InputError(MuSweepError, ValueError):
    """An argument is outside its valid domain (non-finite entries, bad counts...)."""


class SingularMatrixError(MuSweepError, ArithmeticError):
    """A linear system is numerically singular.

    ``condition`` holds the 2-norm condition estimate that triggered the error.
    """

    def __init__(self, msg, condition=float("inf")):
        super().__init__(msg)
        self.condition = condition


class SingularFrequencyError(SingularMatrixError):
    """``j*omega*I - A`` is singular: ``omega`` sits on a pole of the plant."""

    def __init__(self, omega, condition=float("inf")):
        super().__init__(
            f"frequency omega={omega!r} rad/s is numerically a pole of M(s) "
            f"(cond(j*omega*I - A) = {condition:.3e})",
            condition,
        )
        self.omega = omega


class CapacityError(MuSweepError):
    """Requested enumeration exceeds the supported size."""


class DegenerateBoxError(MuSweepError, ValueError):
    """A box with no positive-width edge cannot be bisected."""


class ModelFormatError(MuSweepError, ValueError):
    """A model or config file could not be parsed or validated."""
