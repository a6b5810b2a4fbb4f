"""Exception types shared across the toolkit."""


class TeleboundsError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(TeleboundsError, ValueError):
    """Subsystem dimensions do not match the operand."""


class DimensionLimitError(TeleboundsError):
    """A tensor product would exceed the configured dimension cap."""


class DomainError(TeleboundsError, ValueError):
    """Input outside the mathematical domain (non-PSD state, bad exponent, ...)."""


class BoundaryError(DomainError):
    """Parameter sits on a boundary where a closed form diverges."""


class TruncationError(TeleboundsError):
    """Fock truncation discards too much probability weight."""


class CovarianceError(TeleboundsError):
    """Channel is not teleportation covariant, so it cannot be simulated."""

    def __init__(self, message, witness=None, residual=None):
        super().__init__(message)
        self.witness = witness
        self.residual = residual
