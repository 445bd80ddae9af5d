"""Exception types raised by the library."""


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class PoleError(DomainError):
    """Evaluation at a pole."""


class SingularPointError(DomainError):
    """Evaluation at a singular point of a potential."""


class BranchError(DomainError):
    """A multivalued quantity was requested off its declared branch."""


class OutOfPatchError(DomainError):
    """A finite-difference stencil leaves the sampled patch."""


class TypeMismatchError(ValueError):
    """A two-form is not of type (1,1) to tolerance."""


class PositivityError(ValueError):
    """A potential or metric failed its positivity gate."""

    def __init__(self, message, value=None, location=None):
        super().__init__(message)
        self.value = value
        self.location = location


class HarmonicityError(ValueError):
    """Curvature requested for a potential that is not harmonic."""


class ObstructionError(ValueError):
    """An integral condition needed by the potential solve fails."""


class AperiodicityError(ValueError):
    """A field expected to be periodic in the fibre direction is not."""


class ConfigError(ValueError):
    """Invalid run configuration."""


class NonHolomorphicError(ObstructionError):
    """The fibre-constant mode of beta is not produced by a holomorphic section."""
