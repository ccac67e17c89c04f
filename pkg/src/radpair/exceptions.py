"""Exception hierarchy shared by the library and the CLI."""


class RadpairError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RadpairError, ValueError):
    """Invalid input: bad layout, out-of-range parameter, malformed config."""


class InvalidStateError(ValidationError):
    """A matrix violates the density-matrix invariants."""


class NumericalError(RadpairError, RuntimeError):
    """Propagation or root refinement failed."""
