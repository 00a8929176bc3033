"""Exception types raised across the package."""


class SurfAreaError(Exception):
    """Base class for all errors raised by surfarea."""


class DegenerateTriangle(SurfAreaError, ValueError):
    """A triangle has (numerically) zero area."""


class InvalidParameter(SurfAreaError, ValueError):
    """A parameter is outside its admissible range."""


class UnknownField(SurfAreaError, KeyError):
    """No built-in field is registered under the requested name."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown field"


class MeshMismatch(SurfAreaError, ValueError):
    """Piecewise-linear surfaces that must share a mesh do not."""


class InsufficientData(SurfAreaError, ValueError):
    """Too few points to fit a convergence rate."""


class NonpositiveError(SurfAreaError, ValueError):
    """A log-log fit received an error value that is zero or negative."""
